#pragma once

#include <optional>

#include "percpool/layer.hpp"

namespace percpool {

/// How many independent perceptron sets a layer instantiates.
enum class SharingMode {
  Global,      ///< one set shared by every channel and window position
  PerChannel,  ///< one set per input channel (NN-Z)
  PerField,    ///< one set per window position (y, x), shared over channels (NN-Field)
  PerTensor,   ///< one set per (channel, y, x) window position (NN-Tensor)
};

enum class Activation { Identity, Relu };

struct PerceptronPoolConfig {
  std::size_t window_h = 2;
  std::size_t window_w = 2;
  std::size_t stride = 2;
  /// Perceptrons evaluated per window; their outputs are laid out as a
  /// sqrt(units) x sqrt(units) block, so this must be a perfect square.
  std::size_t units = 1;
  bool use_bias = true;
  Activation activation = Activation::Identity;
  SharingMode sharing = SharingMode::Global;
  double lr_factor = 0.1;
  double wd_factor = 0.0;
};

/// Zero padding applied around each input plane before windowing.
struct Padding {
  std::size_t top = 0;
  std::size_t bottom = 0;
  std::size_t left = 0;
  std::size_t right = 0;
};

struct GridPos {
  std::size_t y = 0;
  std::size_t x = 0;
  friend bool operator==(const GridPos&, const GridPos&) = default;
};

/// Integer square root of `units`; throws ConfigError if it is not a perfect square.
std::size_t unit_grid_side(std::size_t units);

/// Output cell written by unit `unit` (0-based) of the window at (i, j):
/// (i*q + unit/q, j*q + unit%q) with q = sqrt(units).
GridPos restructure(std::size_t unit, std::size_t i, std::size_t j, std::size_t units);

/// Number of perceptron sets for a sharing mode given the input channel
/// count and the window-position grid.
std::size_t instance_count(SharingMode sharing, std::size_t channels, std::size_t out_h,
                           std::size_t out_w);

/// instances * units * (window_h*window_w + [use_bias]).
std::size_t param_count(const PerceptronPoolConfig& config, std::size_t instances = 1);

/// Parameter count of a layer once bound to `input` (batch ignored).
std::size_t param_count(const PerceptronPoolConfig& config, const Shape4& input);

const char* to_string(SharingMode mode);
const char* to_string(Activation act);
SharingMode parse_sharing(const std::string& s);
Activation parse_activation(const std::string& s);

/// Learnable pooling: every window is reduced by `units` perceptrons
/// act(sum(w * x) + b) whose outputs are restructured into a spatial block.
///
/// Output shape is (B, C, out_h*q, out_w*q) with out_h = pool_out_dim(H, window_h,
/// stride) and q = sqrt(units). Each channel is processed independently; which
/// weights a channel/position uses is decided by the sharing mode. Global layers
/// own their parameters from construction; the other modes allocate on the
/// first bind()/forward() and reject any later change of input shape.
///
/// Freshly allocated parameters hold the average-pool initialization
/// (weights 1/(window_h*window_w), bias 0).
template <typename T>
class PerceptronPool : public Layer<T> {
 public:
  explicit PerceptronPool(const PerceptronPoolConfig& config) : PerceptronPool(config, Padding{}) {}

  const PerceptronPoolConfig& config() const { return config_; }
  const Padding& padding() const { return pad_; }
  bool bound() const { return bound_; }
  std::size_t instances() const { return instances_; }
  std::size_t grid_side() const { return q_; }

  /// Weights shaped (instances, units, window_h, window_w).
  Parameter<T>& weight() { return weight_; }
  const Parameter<T>& weight() const { return weight_; }
  /// Bias shaped (1, 1, instances, units); null when use_bias is false.
  Parameter<T>* bias() { return config_.use_bias ? &bias_ : nullptr; }
  const Parameter<T>* bias() const { return config_.use_bias ? &bias_ : nullptr; }

  /// Which perceptron set serves channel c at window position (i, j).
  std::size_t instance_index(std::size_t c, std::size_t i, std::size_t j) const;

  /// Copies one perceptron set (units x window_h x window_w weights and
  /// `units` biases) into every instance.
  void broadcast(std::span<const T> weights, std::span<const T> biases);

  std::string kind() const override { return "perceptron_pool"; }
  Shape4 bind(const Shape4& input) override;
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  double kink_margin() const override;

 protected:
  PerceptronPool(const PerceptronPoolConfig& config, Padding pad);
  std::vector<Parameter<T>*> own_parameters() override;

 private:
  void allocate(std::size_t instances);

  PerceptronPoolConfig config_;
  Padding pad_;
  std::size_t q_ = 1;
  bool bound_ = false;
  std::size_t instances_ = 0;
  Shape4 bound_input_;
  std::size_t out_h_ = 0;
  std::size_t out_w_ = 0;
  Parameter<T> weight_;
  Parameter<T> bias_;

  Tensor<T> input_;
  Tensor<T> pre_;  // pre-activations in output layout, kept for ReLU
  bool has_saved_ = false;
};

struct PerceptronUpsampleConfig {
  std::size_t window_h = 2;
  std::size_t window_w = 2;
  std::size_t factor = 2;  ///< u; the layer runs u*u perceptrons per position
  bool use_bias = true;
  Activation activation = Activation::Identity;
  SharingMode sharing = SharingMode::Global;
  double lr_factor = 0.1;
  double wd_factor = 0.0;

  PerceptronPoolConfig as_pool_config() const;
  /// Stride-1 "same" padding; the extra row/column of an even window goes on
  /// the top/left side.
  Padding padding() const;
};

/// Learned upscaling: u*u perceptrons evaluated at stride 1 on a zero-padded
/// input, restructured into u x u blocks, giving (B, C, u*H, u*W).
template <typename T>
class PerceptronUpsample final : public PerceptronPool<T> {
 public:
  explicit PerceptronUpsample(const PerceptronUpsampleConfig& config);

  std::size_t factor() const { return factor_; }
  std::string kind() const override { return "perceptron_upsample"; }

 private:
  std::size_t factor_;
};

}  // namespace percpool
