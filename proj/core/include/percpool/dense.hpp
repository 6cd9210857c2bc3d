#pragma once

#include "percpool/layer.hpp"

namespace percpool {

/// Fully connected layer. Flattens each (C, H, W) input item into C*H*W
/// features and produces (B, out_features, 1, 1).
template <typename T>
class Dense final : public Layer<T> {
 public:
  Dense(std::size_t in_features, std::size_t out_features);

  std::size_t in_features() const { return in_; }
  std::size_t out_features() const { return out_; }
  Parameter<T>& weight() { return weight_; }
  Parameter<T>& bias() { return bias_; }

  std::string kind() const override { return "dense"; }
  Shape4 bind(const Shape4& input) override;
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;

 protected:
  std::vector<Parameter<T>*> own_parameters() override { return {&weight_, &bias_}; }

 private:
  std::size_t in_;
  std::size_t out_;
  Parameter<T> weight_;  // (1, 1, out, in)
  Parameter<T> bias_;    // (1, 1, 1, out)
  Tensor<T> input_;
  bool has_input_ = false;
};

}  // namespace percpool
