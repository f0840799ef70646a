#ifndef LESIONSEG_NN_TENSOR_HPP_
#define LESIONSEG_NN_TENSOR_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "lesionseg/common.hpp"

namespace lesionseg::nn {

// Dense row-major tensor. Layout for activations is NCHW.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    data.assign(numel_of(shape), T(0));
  }

  static std::size_t numel_of(const std::vector<int>& s) {
    std::size_t n = s.empty() ? 0 : 1;
    for (int d : s) n *= static_cast<std::size_t>(d);
    return n;
  }

  std::size_t numel() const { return data.size(); }
  bool empty() const { return data.empty(); }
  int dim(int i) const { return shape[i]; }

  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  void zero() { std::fill(data.begin(), data.end(), T(0)); }
  void fill(T v) { std::fill(data.begin(), data.end(), v); }

  void reshape(std::vector<int> s) {
    if (numel_of(s) != data.size())
      throw InputError("tensor reshape changes element count");
    shape = std::move(s);
  }

  // NCHW accessor.
  T& at4(int n, int c, int y, int x) {
    return data[((static_cast<std::size_t>(n) * shape[1] + c) * shape[2] + y) *
                    shape[3] +
                x];
  }
  T at4(int n, int c, int y, int x) const {
    return data[((static_cast<std::size_t>(n) * shape[1] + c) * shape[2] + y) *
                    shape[3] +
                x];
  }
  // (N,D) accessor.
  T& at2(int n, int d) { return data[static_cast<std::size_t>(n) * shape[1] + d]; }
  T at2(int n, int d) const {
    return data[static_cast<std::size_t>(n) * shape[1] + d];
  }
};

template <typename T>
struct ParamTensor {
  Tensor<T> value;
  Tensor<T> grad;

  void resize(std::vector<int> shape) {
    value = Tensor<T>(shape);
    grad = Tensor<T>(std::move(shape));
  }
};

template <typename T>
struct ParamRef {
  std::string name;
  ParamTensor<T>* param = nullptr;
};

// Non-trainable persistent state (batch-norm running statistics).
template <typename T>
struct StateRef {
  std::string name;
  Tensor<T>* tensor = nullptr;
};

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape[0] != b.shape[0] || a.shape[2] != b.shape[2] ||
      a.shape[3] != b.shape[3])
    throw InputError("concat_channels: incompatible shapes");
  const int n = a.shape[0], ca = a.shape[1], cb = b.shape[1];
  const std::size_t plane = (std::size_t)a.shape[2] * a.shape[3];
  Tensor<T> out({n, ca + cb, a.shape[2], a.shape[3]});
  for (int i = 0; i < n; ++i) {
    std::copy_n(a.ptr() + (std::size_t)i * ca * plane, ca * plane,
                out.ptr() + (std::size_t)i * (ca + cb) * plane);
    std::copy_n(b.ptr() + (std::size_t)i * cb * plane, cb * plane,
                out.ptr() + ((std::size_t)i * (ca + cb) + ca) * plane);
  }
  return out;
}

template <typename T>
void split_channels(const Tensor<T>& g, Tensor<T>& ga, Tensor<T>& gb) {
  const int n = g.shape[0], ca = ga.shape[1], cb = gb.shape[1];
  const std::size_t plane = (std::size_t)g.shape[2] * g.shape[3];
  for (int i = 0; i < n; ++i) {
    std::copy_n(g.ptr() + (std::size_t)i * (ca + cb) * plane, ca * plane,
                ga.ptr() + (std::size_t)i * ca * plane);
    std::copy_n(g.ptr() + ((std::size_t)i * (ca + cb) + ca) * plane,
                cb * plane, gb.ptr() + (std::size_t)i * cb * plane);
  }
}

template <typename T>
void add_inplace(Tensor<T>& dst, const Tensor<T>& src) {
  if (dst.numel() != src.numel()) throw InputError("add_inplace: size mismatch");
  for (std::size_t i = 0; i < dst.numel(); ++i) dst.data[i] += src.data[i];
}

}  // namespace lesionseg::nn

#endif  // LESIONSEG_NN_TENSOR_HPP_
