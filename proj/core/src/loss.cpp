#include "percpool/loss.hpp"

#include <algorithm>
#include <cmath>

namespace percpool {

template <typename T>
LossResult<T> softmax_xent(const Tensor<T>& logits, std::span<const int> labels) {
  const std::size_t batch = logits.batch();
  const std::size_t k = logits.channels() * logits.height() * logits.width();
  if (labels.size() != batch) {
    throw ShapeError("softmax_xent: " + std::to_string(labels.size()) + " labels for batch of " +
                     std::to_string(batch));
  }
  LossResult<T> r{0.0, Tensor<T>(logits.shape())};
  std::vector<double> prob(k);
  for (std::size_t b = 0; b < batch; ++b) {
    const int label = labels[b];
    if (label < 0 || static_cast<std::size_t>(label) >= k) {
      throw ConfigError("label " + std::to_string(label) + " outside class range [0, " +
                        std::to_string(k) + ")");
    }
    auto z = logits.item(b);
    const double zmax = *std::max_element(z.begin(), z.end());
    double denom = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      prob[i] = std::exp(static_cast<double>(z[i]) - zmax);
      denom += prob[i];
    }
    r.loss += std::log(denom) - (static_cast<double>(z[label]) - zmax);
    auto g = r.grad.item(b);
    for (std::size_t i = 0; i < k; ++i) {
      const double p = prob[i] / denom;
      g[i] = static_cast<T>((p - (static_cast<std::size_t>(label) == i ? 1.0 : 0.0)) /
                            static_cast<double>(batch));
    }
  }
  r.loss /= static_cast<double>(batch);
  return r;
}

template <typename T>
std::vector<int> argmax_classes(const Tensor<T>& logits) {
  std::vector<int> out(logits.batch());
  for (std::size_t b = 0; b < logits.batch(); ++b) {
    auto z = logits.item(b);
    out[b] = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
  }
  return out;
}

template LossResult<float> softmax_xent(const Tensor<float>&, std::span<const int>);
template LossResult<double> softmax_xent(const Tensor<double>&, std::span<const int>);
template std::vector<int> argmax_classes(const Tensor<float>&);
template std::vector<int> argmax_classes(const Tensor<double>&);

}  // namespace percpool
