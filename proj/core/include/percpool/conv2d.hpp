#pragma once

#include "percpool/layer.hpp"

namespace percpool {

struct Conv2dConfig {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel_h = 3;
  std::size_t kernel_w = 3;
  std::size_t stride = 1;
  std::size_t pad = 0;
};

/// 2-D cross-correlation with zero padding and a per-output-channel bias.
/// Weights are (out_ch, in_ch, kh, kw); bias is (1, 1, 1, out_ch).
template <typename T>
class Conv2d final : public Layer<T> {
 public:
  explicit Conv2d(const Conv2dConfig& config);

  const Conv2dConfig& config() const { return config_; }
  Parameter<T>& weight() { return weight_; }
  Parameter<T>& bias() { return bias_; }

  std::string kind() const override { return "conv2d"; }
  Shape4 bind(const Shape4& input) override;
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;

 protected:
  std::vector<Parameter<T>*> own_parameters() override { return {&weight_, &bias_}; }

 private:
  Conv2dConfig config_;
  Parameter<T> weight_;
  Parameter<T> bias_;
  Tensor<T> input_;
  bool has_input_ = false;
};

}  // namespace percpool
