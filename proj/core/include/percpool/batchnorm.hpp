#pragma once

#include "percpool/layer.hpp"

namespace percpool {

/// Per-channel batch normalization. Train mode normalizes with the biased
/// batch variance and folds the unbiased variance into the running estimate;
/// eval mode uses the running statistics.
template <typename T>
class BatchNorm2d final : public Layer<T> {
 public:
  explicit BatchNorm2d(std::size_t channels, double eps = 1e-5, double momentum = 0.1);

  std::size_t channels() const { return channels_; }
  double eps() const { return eps_; }
  double momentum() const { return momentum_; }
  Parameter<T>& gamma() { return gamma_; }
  Parameter<T>& beta() { return beta_; }
  Tensor<T>& running_mean() { return running_mean_; }
  Tensor<T>& running_var() { return running_var_; }

  std::string kind() const override { return "batchnorm"; }
  Shape4 bind(const Shape4& input) override;
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;

 protected:
  std::vector<Parameter<T>*> own_parameters() override { return {&gamma_, &beta_}; }
  std::vector<std::pair<std::string, Tensor<T>*>> own_buffers() override {
    return {{"running_mean", &running_mean_}, {"running_var", &running_var_}};
  }

 private:
  std::size_t channels_;
  double eps_;
  double momentum_;
  Parameter<T> gamma_;
  Parameter<T> beta_;
  Tensor<T> running_mean_;
  Tensor<T> running_var_;

  // saved by forward
  Mode mode_ = Mode::Train;
  Tensor<T> xhat_;
  std::vector<double> inv_std_;
  bool has_saved_ = false;
};

}  // namespace percpool
