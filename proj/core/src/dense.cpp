#include "percpool/dense.hpp"

#include <Eigen/Core>

namespace percpool {

namespace {
template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
}

template <typename T>
Dense<T>::Dense(std::size_t in_features, std::size_t out_features)
    : in_(in_features),
      out_(out_features),
      weight_("weight", {1, 1, out_features, in_features}),
      bias_("bias", {1, 1, 1, out_features}) {}

template <typename T>
Shape4 Dense<T>::bind(const Shape4& input) {
  const std::size_t features = input.channels * input.height * input.width;
  if (features != in_) {
    throw ConfigError("dense expects " + std::to_string(in_) + " features, got " +
                      std::to_string(features));
  }
  return {input.batch, out_, 1, 1};
}

template <typename T>
Tensor<T> Dense<T>::forward(const Tensor<T>& x, Mode) {
  if (x.channels() * x.height() * x.width() != in_) {
    throw ShapeError("dense input shape mismatch: " + x.shape().str());
  }
  Tensor<T> out({x.batch(), out_, 1, 1});
  Eigen::Map<const RowMat<T>> xm(x.raw(), x.batch(), in_);
  Eigen::Map<const RowMat<T>> w(weight_.value.raw(), out_, in_);
  Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> b(bias_.value.raw(), out_);
  Eigen::Map<RowMat<T>> y(out.raw(), x.batch(), out_);
  y.noalias() = xm * w.transpose();
  y.rowwise() += b;
  input_ = x;
  has_input_ = true;
  return out;
}

template <typename T>
Tensor<T> Dense<T>::backward(const Tensor<T>& grad_out) {
  if (!has_input_) throw ShapeError("dense backward called before forward");
  if (grad_out.shape() != Shape4{input_.batch(), out_, 1, 1}) {
    throw ShapeError("dense grad_out shape mismatch: " + grad_out.shape().str());
  }
  const std::size_t batch = input_.batch();
  Eigen::Map<const RowMat<T>> xm(input_.raw(), batch, in_);
  Eigen::Map<const RowMat<T>> gy(grad_out.raw(), batch, out_);
  Eigen::Map<const RowMat<T>> w(weight_.value.raw(), out_, in_);
  Eigen::Map<RowMat<T>> dw(weight_.grad.raw(), out_, in_);
  Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> db(bias_.grad.raw(), out_);
  dw.noalias() += gy.transpose() * xm;
  db += gy.colwise().sum();
  Tensor<T> grad_in(input_.shape());
  Eigen::Map<RowMat<T>> gx(grad_in.raw(), batch, in_);
  gx.noalias() = gy * w;
  return grad_in;
}

template class Dense<float>;
template class Dense<double>;

}  // namespace percpool
