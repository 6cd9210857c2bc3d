#include "percpool/layer.hpp"

#include <algorithm>

namespace percpool {

std::string join_name(const std::string& prefix, const std::string& name) {
  if (prefix.empty()) return name;
  if (name.empty()) return prefix;
  return prefix + "." + name;
}

template <typename T>
void Layer<T>::collect_state(const std::string& prefix, std::vector<StateEntry<T>>& out) {
  for (Parameter<T>* p : own_parameters()) {
    out.push_back({join_name(prefix, p->name), &p->value, p});
  }
  for (auto& [name, buf] : own_buffers()) {
    out.push_back({join_name(prefix, name), buf, nullptr});
  }
}

template <typename T>
std::vector<Parameter<T>*> Layer<T>::parameters() {
  std::vector<Parameter<T>*> params;
  for (const auto& e : state()) {
    if (e.param != nullptr) params.push_back(e.param);
  }
  return params;
}

template <typename T>
std::vector<StateEntry<T>> Layer<T>::state(const std::string& prefix) {
  std::vector<StateEntry<T>> out;
  collect_state(prefix, out);
  return out;
}

template <typename T>
std::size_t Layer<T>::param_count() {
  std::size_t n = 0;
  for (Parameter<T>* p : parameters()) n += p->value.size();
  return n;
}

template <typename T>
void Layer<T>::zero_grad() {
  for (Parameter<T>* p : parameters()) p->grad.fill(T{0});
}

template <typename T>
Shape4 Sequential<T>::bind(const Shape4& input) {
  Shape4 s = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    try {
      s = layers_[i]->bind(s);
    } catch (const ConfigError& e) {
      throw ConfigError(kind_ + " layer " + std::to_string(i) + " (" + layers_[i]->kind() +
                        "): " + e.what());
    }
  }
  return s;
}

template <typename T>
Tensor<T> Sequential<T>::forward(const Tensor<T>& x, Mode mode) {
  Tensor<T> h = x;
  for (auto& layer : layers_) h = layer->forward(h, mode);
  return h;
}

template <typename T>
Tensor<T> Sequential<T>::forward_checked(const Tensor<T>& x, Mode mode) {
  Tensor<T> h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i]->forward(h, mode);
    if (!all_finite(h.data())) {
      throw NumericError("non-finite activations first produced by layer " + std::to_string(i) +
                         " (" + layers_[i]->kind() + ")");
    }
  }
  return h;
}

template <typename T>
Tensor<T> Sequential<T>::backward(const Tensor<T>& grad_out) {
  Tensor<T> g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
  return g;
}

template <typename T>
void Sequential<T>::collect_state(const std::string& prefix, std::vector<StateEntry<T>>& out) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    layers_[i]->collect_state(join_name(prefix, std::to_string(i)), out);
  }
}

template <typename T>
double Sequential<T>::kink_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& layer : layers_) m = std::min(m, layer->kink_margin());
  return m;
}

template class Layer<float>;
template class Layer<double>;
template class Sequential<float>;
template class Sequential<double>;

}  // namespace percpool
