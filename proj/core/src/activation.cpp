#include "percpool/activation.hpp"

#include <algorithm>
#include <cmath>

namespace percpool {

template <typename T>
Tensor<T> Relu<T>::forward(const Tensor<T>& x, Mode) {
  Tensor<T> out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > T{0} ? x[i] : T{0};
  input_ = x;
  has_input_ = true;
  return out;
}

template <typename T>
Tensor<T> Relu<T>::backward(const Tensor<T>& grad_out) {
  if (!has_input_ || grad_out.shape() != input_.shape()) {
    throw ShapeError("relu backward without matching forward");
  }
  Tensor<T> grad_in(grad_out.shape());
  for (std::size_t i = 0; i < grad_out.size(); ++i) {
    grad_in[i] = input_[i] > T{0} ? grad_out[i] : T{0};
  }
  return grad_in;
}

template <typename T>
double Relu<T>::kink_margin() const {
  double m = std::numeric_limits<double>::infinity();
  if (!has_input_) return m;
  for (T v : input_.data()) m = std::min(m, std::abs(static_cast<double>(v)));
  return m;
}

template class Relu<float>;
template class Relu<double>;

}  // namespace percpool
