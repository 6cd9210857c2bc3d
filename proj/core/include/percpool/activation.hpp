#pragma once

#include "percpool/layer.hpp"

namespace percpool {

template <typename T>
class Relu final : public Layer<T> {
 public:
  std::string kind() const override { return "relu"; }
  Shape4 bind(const Shape4& input) override { return input; }
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  double kink_margin() const override;

 private:
  Tensor<T> input_;
  bool has_input_ = false;
};

}  // namespace percpool
