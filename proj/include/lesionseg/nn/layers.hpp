#ifndef LESIONSEG_NN_LAYERS_HPP_
#define LESIONSEG_NN_LAYERS_HPP_

#include <Eigen/Core>

#include <cmath>
#include <limits>

#include "lesionseg/nn/tensor.hpp"

namespace lesionseg::nn {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

inline int conv_out_size(int in, int kernel, int stride, int pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

// 2-D convolution, zero padding, im2col + GEMM. Caches the input column
// buffers between forward and backward.
template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(int in_ch, int out_ch, int kernel, int stride = 1, int pad = -1,
         bool bias = true)
      : in_ch_(in_ch), out_ch_(out_ch), k_(kernel), stride_(stride),
        pad_(pad < 0 ? kernel / 2 : pad), has_bias_(bias) {
    w_.resize({out_ch, in_ch, kernel, kernel});
    if (bias) b_.resize({out_ch});
  }

  void init_params(Rng& rng) {
    const double std = std::sqrt(2.0 / (in_ch_ * k_ * k_));
    for (auto& v : w_.value.data) v = static_cast<T>(rng.normal(0.0, std));
    if (has_bias_) b_.value.zero();
  }

  Tensor<T> forward(const Tensor<T>& x) {
    const int n = x.shape[0], h = x.shape[2], w = x.shape[3];
    if (x.shape[1] != in_ch_) throw InputError("conv: channel mismatch");
    ho_ = conv_out_size(h, k_, stride_, pad_);
    wo_ = conv_out_size(w, k_, stride_, pad_);
    in_h_ = h;
    in_w_ = w;
    const int ckk = in_ch_ * k_ * k_;
    const std::size_t spatial = (std::size_t)ho_ * wo_;

    cols_.resize(n);
    Tensor<T> out({n, out_ch_, ho_, wo_});
    for (int i = 0; i < n; ++i) {
      if (cols_[i].shape != std::vector<int>{ckk, ho_ * wo_})
        cols_[i] = Tensor<T>({ckk, ho_ * wo_});
      im2col(x.ptr() + (std::size_t)i * in_ch_ * h * w, cols_[i].ptr());
      ConstMatMap<T> wm(w_.value.ptr(), out_ch_, ckk);
      ConstMatMap<T> cm(cols_[i].ptr(), ckk, (int)spatial);
      MatMap<T> om(out.ptr() + (std::size_t)i * out_ch_ * spatial, out_ch_,
                   (int)spatial);
      om.noalias() = wm * cm;
      if (has_bias_)
        for (int c = 0; c < out_ch_; ++c)
          om.row(c).array() += b_.value.data[c];
    }
    return out;
  }

  Tensor<T> backward(const Tensor<T>& gout) {
    const int n = gout.shape[0];
    const int ckk = in_ch_ * k_ * k_;
    const std::size_t spatial = (std::size_t)ho_ * wo_;
    Tensor<T> gin({n, in_ch_, in_h_, in_w_});
    Tensor<T> gcol({ckk, ho_ * wo_});
    MatMap<T> gwm(w_.grad.ptr(), out_ch_, ckk);
    for (int i = 0; i < n; ++i) {
      ConstMatMap<T> gom(gout.ptr() + (std::size_t)i * out_ch_ * spatial,
                         out_ch_, (int)spatial);
      ConstMatMap<T> cm(cols_[i].ptr(), ckk, (int)spatial);
      gwm.noalias() += gom * cm.transpose();
      if (has_bias_)
        for (int c = 0; c < out_ch_; ++c)
          b_.grad.data[c] += gom.row(c).sum();
      ConstMatMap<T> wm(w_.value.ptr(), out_ch_, ckk);
      MatMap<T> gcm(gcol.ptr(), ckk, (int)spatial);
      gcm.noalias() = wm.transpose() * gom;
      col2im(gcol.ptr(), gin.ptr() + (std::size_t)i * in_ch_ * in_h_ * in_w_);
    }
    return gin;
  }

  void collect(const std::string& prefix, std::vector<ParamRef<T>>& params,
               std::vector<StateRef<T>>& /*state*/) {
    params.push_back({prefix + ".weight", &w_});
    if (has_bias_) params.push_back({prefix + ".bias", &b_});
  }

  int out_channels() const { return out_ch_; }
  int kernel() const { return k_; }
  int stride() const { return stride_; }

 private:
  void im2col(const T* x, T* col) const {
    const int ho = ho_, wo = wo_;
    for (int c = 0; c < in_ch_; ++c)
      for (int ky = 0; ky < k_; ++ky)
        for (int kx = 0; kx < k_; ++kx) {
          T* dst = col + ((std::size_t)(c * k_ + ky) * k_ + kx) * ho * wo;
          for (int oy = 0; oy < ho; ++oy) {
            const int sy = oy * stride_ - pad_ + ky;
            if (sy < 0 || sy >= in_h_) {
              std::fill_n(dst + (std::size_t)oy * wo, wo, T(0));
              continue;
            }
            const T* src = x + ((std::size_t)c * in_h_ + sy) * in_w_;
            for (int ox = 0; ox < wo; ++ox) {
              const int sx = ox * stride_ - pad_ + kx;
              dst[(std::size_t)oy * wo + ox] =
                  (sx >= 0 && sx < in_w_) ? src[sx] : T(0);
            }
          }
        }
  }

  void col2im(const T* col, T* gx) const {
    for (int c = 0; c < in_ch_; ++c)
      for (int ky = 0; ky < k_; ++ky)
        for (int kx = 0; kx < k_; ++kx) {
          const T* src = col + ((std::size_t)(c * k_ + ky) * k_ + kx) * ho_ * wo_;
          for (int oy = 0; oy < ho_; ++oy) {
            const int sy = oy * stride_ - pad_ + ky;
            if (sy < 0 || sy >= in_h_) continue;
            T* dst = gx + ((std::size_t)c * in_h_ + sy) * in_w_;
            for (int ox = 0; ox < wo_; ++ox) {
              const int sx = ox * stride_ - pad_ + kx;
              if (sx >= 0 && sx < in_w_) dst[sx] += src[(std::size_t)oy * wo_ + ox];
            }
          }
        }
  }

  int in_ch_ = 0, out_ch_ = 0, k_ = 0, stride_ = 1, pad_ = 0;
  bool has_bias_ = true;
  int in_h_ = 0, in_w_ = 0, ho_ = 0, wo_ = 0;
  ParamTensor<T> w_, b_;
  std::vector<Tensor<T>> cols_;
};

// Batch normalization over (N,H,W) per channel. Training uses batch
// statistics (biased variance) and tracks running estimates for eval mode.
template <typename T>
class BatchNorm2d {
 public:
  BatchNorm2d() = default;
  explicit BatchNorm2d(int channels, T eps = T(1e-5), T momentum = T(0.1))
      : ch_(channels), eps_(eps), momentum_(momentum) {
    gamma_.resize({channels});
    beta_.resize({channels});
    gamma_.value.fill(T(1));
    running_mean_ = Tensor<T>({channels});
    running_var_ = Tensor<T>({channels});
    running_var_.fill(T(1));
  }

  Tensor<T> forward(const Tensor<T>& x, bool train) {
    const int n = x.shape[0], h = x.shape[2], w = x.shape[3];
    if (x.shape[1] != ch_) throw InputError("batchnorm: channel mismatch");
    const std::size_t m = (std::size_t)n * h * w;
    train_cached_ = train;
    mean_.assign(ch_, T(0));
    invstd_.assign(ch_, T(0));
    xhat_ = Tensor<T>(x.shape);
    Tensor<T> out(x.shape);
    const std::size_t plane = (std::size_t)h * w;

    for (int c = 0; c < ch_; ++c) {
      T mean, var;
      if (train) {
        T sum = 0, sq = 0;
        for (int i = 0; i < n; ++i) {
          const T* p = x.ptr() + ((std::size_t)i * ch_ + c) * plane;
          for (std::size_t j = 0; j < plane; ++j) {
            sum += p[j];
            sq += p[j] * p[j];
          }
        }
        mean = sum / (T)m;
        var = sq / (T)m - mean * mean;
        if (var < 0) var = 0;
        running_mean_.data[c] =
            (T(1) - momentum_) * running_mean_.data[c] + momentum_ * mean;
        running_var_.data[c] =
            (T(1) - momentum_) * running_var_.data[c] + momentum_ * var;
      } else {
        mean = running_mean_.data[c];
        var = running_var_.data[c];
      }
      const T invstd = T(1) / std::sqrt(var + eps_);
      mean_[c] = mean;
      invstd_[c] = invstd;
      const T g = gamma_.value.data[c], b = beta_.value.data[c];
      for (int i = 0; i < n; ++i) {
        const T* p = x.ptr() + ((std::size_t)i * ch_ + c) * plane;
        T* xh = xhat_.ptr() + ((std::size_t)i * ch_ + c) * plane;
        T* o = out.ptr() + ((std::size_t)i * ch_ + c) * plane;
        for (std::size_t j = 0; j < plane; ++j) {
          xh[j] = (p[j] - mean) * invstd;
          o[j] = g * xh[j] + b;
        }
      }
    }
    return out;
  }

  Tensor<T> backward(const Tensor<T>& gout) {
    const int n = gout.shape[0], h = gout.shape[2], w = gout.shape[3];
    const std::size_t m = (std::size_t)n * h * w;
    const std::size_t plane = (std::size_t)h * w;
    Tensor<T> gin(gout.shape);
    for (int c = 0; c < ch_; ++c) {
      T sum_g = 0, sum_gx = 0;
      for (int i = 0; i < n; ++i) {
        const T* g = gout.ptr() + ((std::size_t)i * ch_ + c) * plane;
        const T* xh = xhat_.ptr() + ((std::size_t)i * ch_ + c) * plane;
        for (std::size_t j = 0; j < plane; ++j) {
          sum_g += g[j];
          sum_gx += g[j] * xh[j];
        }
      }
      gamma_.grad.data[c] += sum_gx;
      beta_.grad.data[c] += sum_g;
      const T gam = gamma_.value.data[c], invstd = invstd_[c];
      for (int i = 0; i < n; ++i) {
        const T* g = gout.ptr() + ((std::size_t)i * ch_ + c) * plane;
        const T* xh = xhat_.ptr() + ((std::size_t)i * ch_ + c) * plane;
        T* gi = gin.ptr() + ((std::size_t)i * ch_ + c) * plane;
        if (train_cached_) {
          for (std::size_t j = 0; j < plane; ++j)
            gi[j] = gam * invstd *
                    (g[j] - sum_g / (T)m - xh[j] * sum_gx / (T)m);
        } else {
          for (std::size_t j = 0; j < plane; ++j) gi[j] = gam * invstd * g[j];
        }
      }
    }
    return gin;
  }

  void collect(const std::string& prefix, std::vector<ParamRef<T>>& params,
               std::vector<StateRef<T>>& state) {
    params.push_back({prefix + ".gamma", &gamma_});
    params.push_back({prefix + ".beta", &beta_});
    state.push_back({prefix + ".running_mean", &running_mean_});
    state.push_back({prefix + ".running_var", &running_var_});
  }

 private:
  int ch_ = 0;
  T eps_ = T(1e-5), momentum_ = T(0.1);
  ParamTensor<T> gamma_, beta_;
  Tensor<T> running_mean_, running_var_;
  Tensor<T> xhat_;
  std::vector<T> mean_, invstd_;
  bool train_cached_ = true;
};

template <typename T>
class Relu {
 public:
  Tensor<T> forward(const Tensor<T>& x) {
    out_ = x;
    for (auto& v : out_.data)
      if (v < T(0)) v = T(0);
    return out_;
  }
  Tensor<T> backward(const Tensor<T>& gout) {
    Tensor<T> gin(gout.shape);
    for (std::size_t i = 0; i < gout.numel(); ++i)
      gin.data[i] = out_.data[i] > T(0) ? gout.data[i] : T(0);
    return gin;
  }

 private:
  Tensor<T> out_;
};

template <typename T>
class MaxPool2d {
 public:
  MaxPool2d() = default;
  MaxPool2d(int kernel, int stride, int pad = 0)
      : k_(kernel), stride_(stride), pad_(pad) {}

  Tensor<T> forward(const Tensor<T>& x) {
    const int n = x.shape[0], c = x.shape[1], h = x.shape[2], w = x.shape[3];
    in_shape_ = x.shape;
    const int ho = conv_out_size(h, k_, stride_, pad_);
    const int wo = conv_out_size(w, k_, stride_, pad_);
    Tensor<T> out({n, c, ho, wo});
    argmax_.assign(out.numel(), 0);
    std::size_t oi = 0;
    for (int i = 0; i < n; ++i)
      for (int cc = 0; cc < c; ++cc) {
        const T* plane = x.ptr() + ((std::size_t)i * c + cc) * h * w;
        for (int oy = 0; oy < ho; ++oy)
          for (int ox = 0; ox < wo; ++ox, ++oi) {
            T best = -std::numeric_limits<T>::infinity();
            std::size_t besti = 0;
            for (int ky = 0; ky < k_; ++ky) {
              const int sy = oy * stride_ - pad_ + ky;
              if (sy < 0 || sy >= h) continue;
              for (int kx = 0; kx < k_; ++kx) {
                const int sx = ox * stride_ - pad_ + kx;
                if (sx < 0 || sx >= w) continue;
                const T v = plane[(std::size_t)sy * w + sx];
                if (v > best) {
                  best = v;
                  besti = (std::size_t)sy * w + sx;
                }
              }
            }
            out.data[oi] = best;
            argmax_[oi] = ((std::size_t)i * c + cc) * h * w + besti;
          }
      }
    return out;
  }

  Tensor<T> backward(const Tensor<T>& gout) {
    Tensor<T> gin(in_shape_);
    for (std::size_t i = 0; i < gout.numel(); ++i)
      gin.data[argmax_[i]] += gout.data[i];
    return gin;
  }

 private:
  int k_ = 2, stride_ = 2, pad_ = 0;
  std::vector<int> in_shape_;
  std::vector<std::size_t> argmax_;
};

template <typename T>
class NearestUpsample {
 public:
  NearestUpsample() = default;
  explicit NearestUpsample(int factor) : f_(factor) {}

  Tensor<T> forward(const Tensor<T>& x) {
    const int n = x.shape[0], c = x.shape[1], h = x.shape[2], w = x.shape[3];
    in_shape_ = x.shape;
    Tensor<T> out({n, c, h * f_, w * f_});
    for (int i = 0; i < n; ++i)
      for (int cc = 0; cc < c; ++cc) {
        const T* src = x.ptr() + ((std::size_t)i * c + cc) * h * w;
        T* dst = out.ptr() + ((std::size_t)i * c + cc) * h * w * f_ * f_;
        for (int y = 0; y < h * f_; ++y)
          for (int x2 = 0; x2 < w * f_; ++x2)
            dst[(std::size_t)y * w * f_ + x2] =
                src[(std::size_t)(y / f_) * w + x2 / f_];
      }
    return out;
  }

  Tensor<T> backward(const Tensor<T>& gout) {
    Tensor<T> gin(in_shape_);
    const int n = in_shape_[0], c = in_shape_[1], h = in_shape_[2],
              w = in_shape_[3];
    for (int i = 0; i < n; ++i)
      for (int cc = 0; cc < c; ++cc) {
        T* dst = gin.ptr() + ((std::size_t)i * c + cc) * h * w;
        const T* src = gout.ptr() + ((std::size_t)i * c + cc) * h * w * f_ * f_;
        for (int y = 0; y < h * f_; ++y)
          for (int x2 = 0; x2 < w * f_; ++x2)
            dst[(std::size_t)(y / f_) * w + x2 / f_] +=
                src[(std::size_t)y * w * f_ + x2];
      }
    return gin;
  }

 private:
  int f_ = 2;
  std::vector<int> in_shape_;
};

template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(int in, int out) : in_(in), out_(out) {
    w_.resize({out, in});
    b_.resize({out});
  }

  void init_params(Rng& rng) {
    const double std = std::sqrt(2.0 / in_);
    for (auto& v : w_.value.data) v = static_cast<T>(rng.normal(0.0, std));
    b_.value.zero();
  }

  Tensor<T> forward(const Tensor<T>& x) {
    x_ = x;
    const int n = x.shape[0];
    Tensor<T> out({n, out_});
    ConstMatMap<T> xm(x.ptr(), n, in_);
    ConstMatMap<T> wm(w_.value.ptr(), out_, in_);
    MatMap<T> om(out.ptr(), n, out_);
    om.noalias() = xm * wm.transpose();
    for (int i = 0; i < n; ++i)
      for (int o = 0; o < out_; ++o) out.at2(i, o) += b_.value.data[o];
    return out;
  }

  Tensor<T> backward(const Tensor<T>& gout) {
    const int n = gout.shape[0];
    ConstMatMap<T> gm(gout.ptr(), n, out_);
    ConstMatMap<T> xm(x_.ptr(), n, in_);
    MatMap<T> gwm(w_.grad.ptr(), out_, in_);
    gwm.noalias() += gm.transpose() * xm;
    for (int i = 0; i < n; ++i)
      for (int o = 0; o < out_; ++o) b_.grad.data[o] += gout.at2(i, o);
    Tensor<T> gin({n, in_});
    ConstMatMap<T> wm(w_.value.ptr(), out_, in_);
    MatMap<T> gim(gin.ptr(), n, in_);
    gim.noalias() = gm * wm;
    return gin;
  }

  void collect(const std::string& prefix, std::vector<ParamRef<T>>& params,
               std::vector<StateRef<T>>& /*state*/) {
    params.push_back({prefix + ".weight", &w_});
    params.push_back({prefix + ".bias", &b_});
  }

 private:
  int in_ = 0, out_ = 0;
  ParamTensor<T> w_, b_;
  Tensor<T> x_;
};

// (N,C,H,W) → (N,C) spatial mean.
template <typename T>
class GlobalAvgPool {
 public:
  Tensor<T> forward(const Tensor<T>& x) {
    in_shape_ = x.shape;
    const int n = x.shape[0], c = x.shape[1];
    const std::size_t plane = (std::size_t)x.shape[2] * x.shape[3];
    Tensor<T> out({n, c});
    for (int i = 0; i < n; ++i)
      for (int cc = 0; cc < c; ++cc) {
        const T* p = x.ptr() + ((std::size_t)i * c + cc) * plane;
        T sum = 0;
        for (std::size_t j = 0; j < plane; ++j) sum += p[j];
        out.at2(i, cc) = sum / (T)plane;
      }
    return out;
  }

  Tensor<T> backward(const Tensor<T>& gout) {
    Tensor<T> gin(in_shape_);
    const int n = in_shape_[0], c = in_shape_[1];
    const std::size_t plane = (std::size_t)in_shape_[2] * in_shape_[3];
    for (int i = 0; i < n; ++i)
      for (int cc = 0; cc < c; ++cc) {
        const T g = gout.at2(i, cc) / (T)plane;
        T* p = gin.ptr() + ((std::size_t)i * c + cc) * plane;
        for (std::size_t j = 0; j < plane; ++j) p[j] = g;
      }
    return gin;
  }

 private:
  std::vector<int> in_shape_;
};

}  // namespace lesionseg::nn

#endif  // LESIONSEG_NN_LAYERS_HPP_
