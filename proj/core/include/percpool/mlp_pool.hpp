#pragma once

#include "percpool/perceptron_pool.hpp"

namespace percpool {

/// Perceptron-pool layers applied in sequence: the restructured output of
/// layer l is the input of layer l+1, so the stack acts as a small MLP
/// evaluated inside every pooling region.
template <typename T>
class MlpPoolStack final : public Layer<T> {
 public:
  explicit MlpPoolStack(const std::vector<PerceptronPoolConfig>& layers);

  std::size_t depth() const { return layers_.size(); }
  PerceptronPool<T>& layer(std::size_t l) { return *layers_.at(l); }
  const PerceptronPool<T>& layer(std::size_t l) const { return *layers_.at(l); }

  /// Spatial shapes after each layer for a given input (first entry is the input).
  std::vector<Shape4> shape_chain(const Shape4& input);

  std::string kind() const override { return "mlp_pool"; }
  Shape4 bind(const Shape4& input) override;
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  void collect_state(const std::string& prefix, std::vector<StateEntry<T>>& out) override;
  double kink_margin() const override;

 private:
  std::vector<std::unique_ptr<PerceptronPool<T>>> layers_;
};

/// Sum of per-layer counts for a Global stack: sum_l p_l * (W_l*H_l + [bias]).
std::size_t param_count(const std::vector<PerceptronPoolConfig>& layers);

/// Layer configs for NN-4-1: four 2x2/2 perceptrons restructured to 2x2,
/// then one 2x2/2 perceptron. `base` supplies bias, sharing and LR/WD factors.
std::vector<PerceptronPoolConfig> nn_4_1(const PerceptronPoolConfig& base,
                                         Activation hidden = Activation::Identity,
                                         Activation output = Activation::Identity);

/// NN-16-1: sixteen 2x2/2 perceptrons restructured to 4x4, then one 4x4/4 perceptron.
std::vector<PerceptronPoolConfig> nn_16_1(const PerceptronPoolConfig& base,
                                          Activation hidden = Activation::Identity,
                                          Activation output = Activation::Identity);

/// A single perceptron whose window covers a whole `extent` x `extent` map,
/// replacing global average pooling. Trained at a 1e-3 learning-rate factor.
PerceptronPoolConfig gap_replacement(std::size_t extent);

}  // namespace percpool
