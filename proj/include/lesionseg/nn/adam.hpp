#ifndef LESIONSEG_NN_ADAM_HPP_
#define LESIONSEG_NN_ADAM_HPP_

#include <cmath>

#include "lesionseg/nn/tensor.hpp"

namespace lesionseg::nn {

template <typename T>
class Adam {
 public:
  Adam(std::vector<ParamRef<T>> params, double lr, double beta1 = 0.9,
       double beta2 = 0.999, double eps = 1e-8)
      : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2),
        eps_(eps) {
    m_.resize(params_.size());
    v_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
      m_[i].assign(params_[i].param->value.numel(), 0.0);
      v_[i].assign(params_[i].param->value.numel(), 0.0);
    }
  }

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }

  void zero_grad() {
    for (auto& p : params_) p.param->grad.zero();
  }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& value = params_[i].param->value.data;
      auto& grad = params_[i].param->grad.data;
      for (std::size_t j = 0; j < value.size(); ++j) {
        const double g = grad[j];
        m_[i][j] = beta1_ * m_[i][j] + (1.0 - beta1_) * g;
        v_[i][j] = beta2_ * v_[i][j] + (1.0 - beta2_) * g * g;
        const double mhat = m_[i][j] / bc1;
        const double vhat = v_[i][j] / bc2;
        value[j] -= static_cast<T>(lr_ * mhat / (std::sqrt(vhat) + eps_));
      }
    }
  }

 private:
  std::vector<ParamRef<T>> params_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace lesionseg::nn

#endif  // LESIONSEG_NN_ADAM_HPP_
