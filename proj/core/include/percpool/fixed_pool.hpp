#pragma once

#include "percpool/layer.hpp"

namespace percpool {

/// Output extent of a window slid over `in_dim` with `stride`, without
/// padding. Throws ConfigError unless the window tiles the input exactly.
std::size_t pool_out_dim(std::size_t in_dim, std::size_t window, std::size_t stride);

enum class PoolMode { Max, Average };

/// Parameter-free max or average pooling. Ties in max mode go to the first
/// element in row-major window order.
template <typename T>
class FixedPool final : public Layer<T> {
 public:
  FixedPool(PoolMode mode, std::size_t window_h, std::size_t window_w, std::size_t stride);

  PoolMode mode() const { return mode_; }

  std::string kind() const override { return mode_ == PoolMode::Max ? "max_pool" : "avg_pool"; }
  Shape4 bind(const Shape4& input) override;
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  double kink_margin() const override { return margin_; }

  /// Flat input offsets of each output's maximum (max mode only).
  const std::vector<std::size_t>& argmax() const { return argmax_; }

 private:
  PoolMode mode_;
  std::size_t window_h_;
  std::size_t window_w_;
  std::size_t stride_;
  Shape4 input_shape_;
  Shape4 output_shape_;
  std::vector<std::size_t> argmax_;
  double margin_ = std::numeric_limits<double>::infinity();
  bool has_saved_ = false;
};

}  // namespace percpool
