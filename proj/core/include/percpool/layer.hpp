#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "percpool/tensor.hpp"

namespace percpool {

enum class Mode { Train, Eval };

/// A trainable tensor with its gradient buffer and the per-group multipliers
/// the optimizer applies to the global learning rate and weight decay.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  double lr_factor = 1.0;
  double wd_factor = 1.0;

  Parameter() = default;
  Parameter(std::string n, const Shape4& shape, double lr = 1.0, double wd = 1.0)
      : name(std::move(n)), value(shape), grad(shape), lr_factor(lr), wd_factor(wd) {}
};

/// One named piece of layer state. `param` is null for non-trainable buffers
/// such as batch-norm running statistics.
template <typename T>
struct StateEntry {
  std::string name;
  Tensor<T>* tensor = nullptr;
  Parameter<T>* param = nullptr;
};

/// Base class of every layer. Layers own their backward pass: forward() saves
/// whatever backward() needs, backward() returns dLoss/dInput and accumulates
/// (adds) parameter gradients.
template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string kind() const = 0;

  /// Validates an input shape (batch ignored), instantiates any lazily sized
  /// parameters and returns the output shape.
  virtual Shape4 bind(const Shape4& input) = 0;

  virtual Tensor<T> forward(const Tensor<T>& x, Mode mode) = 0;
  virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;

  /// Appends parameters and buffers under `prefix`. Composite layers recurse.
  virtual void collect_state(const std::string& prefix, std::vector<StateEntry<T>>& out);

  /// Distance of the last forward's inputs to the nearest non-differentiable
  /// point (ReLU kink, max-pool tie). Infinity for smooth layers.
  virtual double kink_margin() const { return std::numeric_limits<double>::infinity(); }

  std::vector<Parameter<T>*> parameters();
  std::vector<StateEntry<T>> state(const std::string& prefix = "");
  std::size_t param_count();
  void zero_grad();

 protected:
  virtual std::vector<Parameter<T>*> own_parameters() { return {}; }
  virtual std::vector<std::pair<std::string, Tensor<T>*>> own_buffers() { return {}; }
};

/// Ordered chain of layers; also used as a composite pooling slot.
template <typename T>
class Sequential final : public Layer<T> {
 public:
  Sequential() = default;
  explicit Sequential(std::string kind) : kind_(std::move(kind)) {}

  void add(std::unique_ptr<Layer<T>> layer) { layers_.push_back(std::move(layer)); }
  std::size_t size() const { return layers_.size(); }
  Layer<T>& at(std::size_t i) { return *layers_.at(i); }
  const Layer<T>& at(std::size_t i) const { return *layers_.at(i); }

  std::string kind() const override { return kind_; }
  Shape4 bind(const Shape4& input) override;
  Tensor<T> forward(const Tensor<T>& x, Mode mode) override;
  Tensor<T> backward(const Tensor<T>& grad_out) override;
  void collect_state(const std::string& prefix, std::vector<StateEntry<T>>& out) override;
  double kink_margin() const override;

  /// Forward that stops with NumericError naming the first layer whose output
  /// contains NaN/Inf.
  Tensor<T> forward_checked(const Tensor<T>& x, Mode mode);

 private:
  std::string kind_ = "sequential";
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

/// Joins a state prefix and a local name with a dot.
std::string join_name(const std::string& prefix, const std::string& name);

}  // namespace percpool
