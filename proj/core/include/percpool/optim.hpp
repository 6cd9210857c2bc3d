#pragma once

#include <memory>
#include <string>
#include <vector>

#include "percpool/layer.hpp"

namespace percpool {

/// A parameter registered with an optimizer plus its optimizer state. The
/// group's lr/wd multipliers are the parameter's own lr_factor/wd_factor.
template <typename T>
struct ParamGroup {
  Parameter<T>* param = nullptr;
  std::vector<T> first;   ///< momentum buffer (SGD) or first moment (Adam)
  std::vector<T> second;  ///< second moment (Adam)
  std::size_t steps = 0;
};

template <typename T>
class Optimizer {
 public:
  virtual ~Optimizer() = default;

  /// Registers a parameter. Throws ConfigError on negative factors.
  void add(Parameter<T>& param);
  void add(const std::vector<Parameter<T>*>& params);

  /// One update of every registered parameter from its accumulated gradient.
  virtual void step(double lr) = 0;
  virtual std::string name() const = 0;

  const std::vector<ParamGroup<T>>& groups() const { return groups_; }
  std::size_t parameter_count() const;

 protected:
  std::vector<ParamGroup<T>> groups_;
};

struct SgdOptions {
  double momentum = 0.9;
  double weight_decay = 0.0;
};

/// v <- momentum*v + g + wd_factor*weight_decay*p;  p <- p - lr*lr_factor*v
template <typename T>
class Sgd final : public Optimizer<T> {
 public:
  explicit Sgd(const SgdOptions& options = {}) : options_(options) {}
  void step(double lr) override;
  std::string name() const override { return "sgd"; }
  const SgdOptions& options() const { return options_; }

 private:
  SgdOptions options_;
};

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

/// Bias-corrected Adam with coupled weight decay (wd_factor*weight_decay*p
/// added to the gradient).
template <typename T>
class Adam final : public Optimizer<T> {
 public:
  explicit Adam(const AdamOptions& options = {}) : options_(options) {}
  void step(double lr) override;
  std::string name() const override { return "adam"; }
  const AdamOptions& options() const { return options_; }

 private:
  AdamOptions options_;
};

/// Step decay: base_lr * decay_factor^(number of decay epochs <= epoch).
struct Schedule {
  double base_lr = 1e-3;
  double decay_factor = 0.1;
  std::vector<std::size_t> decay_epochs;

  /// Throws ConfigError unless decay_factor is in (0, 1] and the epochs are strictly increasing.
  void validate() const;
  bool decays_at(std::size_t epoch) const;
};

double schedule_lr(const Schedule& schedule, std::size_t epoch);

}  // namespace percpool
