#pragma once

#include <span>

#include "percpool/tensor.hpp"

namespace percpool {

template <typename T>
struct LossResult {
  double loss = 0.0;  ///< mean over the batch
  Tensor<T> grad;     ///< dLoss/dlogits
};

/// Softmax cross-entropy over logits shaped (B, K, 1, 1) (any (C,H,W) item
/// layout is flattened to K = C*H*W). Throws ConfigError for labels >= K.
template <typename T>
LossResult<T> softmax_xent(const Tensor<T>& logits, std::span<const int> labels);

/// Index of the largest logit per batch item.
template <typename T>
std::vector<int> argmax_classes(const Tensor<T>& logits);

}  // namespace percpool
