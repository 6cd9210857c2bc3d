#include "percpool/mlp_pool.hpp"

#include <algorithm>

namespace percpool {

template <typename T>
MlpPoolStack<T>::MlpPoolStack(const std::vector<PerceptronPoolConfig>& layers) {
  if (layers.empty()) throw ConfigError("mlp pool stack needs at least one layer");
  for (const auto& c : layers) layers_.push_back(std::make_unique<PerceptronPool<T>>(c));
}

template <typename T>
std::vector<Shape4> MlpPoolStack<T>::shape_chain(const Shape4& input) {
  std::vector<Shape4> chain{input};
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    try {
      chain.push_back(layers_[l]->bind(chain.back()));
    } catch (const ConfigError& e) {
      throw ConfigError("mlp pool layer " + std::to_string(l) + ": input " + chain.back().str() +
                        " rejected: " + e.what());
    }
  }
  return chain;
}

template <typename T>
Shape4 MlpPoolStack<T>::bind(const Shape4& input) {
  return shape_chain(input).back();
}

template <typename T>
Tensor<T> MlpPoolStack<T>::forward(const Tensor<T>& x, Mode mode) {
  bind(x.shape());
  Tensor<T> h = x;
  for (auto& l : layers_) h = l->forward(h, mode);
  return h;
}

template <typename T>
Tensor<T> MlpPoolStack<T>::backward(const Tensor<T>& grad_out) {
  Tensor<T> g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

template <typename T>
void MlpPoolStack<T>::collect_state(const std::string& prefix, std::vector<StateEntry<T>>& out) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    layers_[l]->collect_state(join_name(prefix, "layer" + std::to_string(l)), out);
  }
}

template <typename T>
double MlpPoolStack<T>::kink_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& l : layers_) m = std::min(m, l->kink_margin());
  return m;
}

std::size_t param_count(const std::vector<PerceptronPoolConfig>& layers) {
  std::size_t n = 0;
  for (const auto& c : layers) n += param_count(c, std::size_t{1});
  return n;
}

namespace {
PerceptronPoolConfig with(const PerceptronPoolConfig& base, std::size_t window, std::size_t stride,
                          std::size_t units, Activation act) {
  PerceptronPoolConfig c = base;
  c.window_h = window;
  c.window_w = window;
  c.stride = stride;
  c.units = units;
  c.activation = act;
  return c;
}
}  // namespace

std::vector<PerceptronPoolConfig> nn_4_1(const PerceptronPoolConfig& base, Activation hidden,
                                         Activation output) {
  return {with(base, 2, 2, 4, hidden), with(base, 2, 2, 1, output)};
}

std::vector<PerceptronPoolConfig> nn_16_1(const PerceptronPoolConfig& base, Activation hidden,
                                          Activation output) {
  return {with(base, 2, 2, 16, hidden), with(base, 4, 4, 1, output)};
}

PerceptronPoolConfig gap_replacement(std::size_t extent) {
  PerceptronPoolConfig c;
  c.window_h = extent;
  c.window_w = extent;
  c.stride = extent;
  c.units = 1;
  c.use_bias = true;
  c.lr_factor = 1e-3;
  c.wd_factor = 0.0;
  return c;
}

template class MlpPoolStack<float>;
template class MlpPoolStack<double>;

}  // namespace percpool
