#include "percpool/optim.hpp"

#include <algorithm>
#include <cmath>

namespace percpool {

template <typename T>
void Optimizer<T>::add(Parameter<T>& param) {
  if (param.lr_factor < 0.0 || param.wd_factor < 0.0) {
    throw ConfigError("parameter '" + param.name + "' has a negative lr/wd factor");
  }
  ParamGroup<T> g;
  g.param = &param;
  g.first.assign(param.value.size(), T{0});
  g.second.assign(param.value.size(), T{0});
  groups_.push_back(std::move(g));
}

template <typename T>
void Optimizer<T>::add(const std::vector<Parameter<T>*>& params) {
  for (Parameter<T>* p : params) add(*p);
}

template <typename T>
std::size_t Optimizer<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& g : groups_) n += g.param->value.size();
  return n;
}

template <typename T>
void Sgd<T>::step(double lr) {
  for (auto& g : this->groups_) {
    Parameter<T>& p = *g.param;
    if (p.grad.shape() != p.value.shape()) throw ShapeError("sgd: grad shape mismatch for " + p.name);
    const double decay = p.wd_factor * options_.weight_decay;
    const double rate = lr * p.lr_factor;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double v = options_.momentum * g.first[i] + p.grad[i] + decay * p.value[i];
      g.first[i] = static_cast<T>(v);
      p.value[i] = static_cast<T>(p.value[i] - rate * v);
    }
    ++g.steps;
  }
}

template <typename T>
void Adam<T>::step(double lr) {
  for (auto& g : this->groups_) {
    Parameter<T>& p = *g.param;
    if (p.grad.shape() != p.value.shape()) throw ShapeError("adam: grad shape mismatch for " + p.name);
    ++g.steps;
    const double decay = p.wd_factor * options_.weight_decay;
    const double rate = lr * p.lr_factor;
    const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(g.steps));
    const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(g.steps));
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double grad = p.grad[i] + decay * p.value[i];
      const double m = options_.beta1 * g.first[i] + (1.0 - options_.beta1) * grad;
      const double v = options_.beta2 * g.second[i] + (1.0 - options_.beta2) * grad * grad;
      g.first[i] = static_cast<T>(m);
      g.second[i] = static_cast<T>(v);
      const double update = (m / c1) / (std::sqrt(v / c2) + options_.eps);
      p.value[i] = static_cast<T>(p.value[i] - rate * update);
    }
  }
}

void Schedule::validate() const {
  if (!(decay_factor > 0.0 && decay_factor <= 1.0)) {
    throw ConfigError("schedule decay factor must be in (0, 1]");
  }
  if (!(base_lr > 0.0)) throw ConfigError("base learning rate must be > 0");
  for (std::size_t i = 1; i < decay_epochs.size(); ++i) {
    if (decay_epochs[i] <= decay_epochs[i - 1]) {
      throw ConfigError("schedule decay epochs must be strictly increasing");
    }
  }
}

bool Schedule::decays_at(std::size_t epoch) const {
  return std::find(decay_epochs.begin(), decay_epochs.end(), epoch) != decay_epochs.end();
}

double schedule_lr(const Schedule& schedule, std::size_t epoch) {
  const auto n = std::count_if(schedule.decay_epochs.begin(), schedule.decay_epochs.end(),
                               [&](std::size_t e) { return e <= epoch; });
  return schedule.base_lr * std::pow(schedule.decay_factor, static_cast<double>(n));
}

template class Optimizer<float>;
template class Optimizer<double>;
template class Sgd<float>;
template class Sgd<double>;
template class Adam<float>;
template class Adam<double>;

}  // namespace percpool
