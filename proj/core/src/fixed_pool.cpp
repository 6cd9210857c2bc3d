#include "percpool/fixed_pool.hpp"

#include <algorithm>
#include <cmath>

namespace percpool {

std::size_t pool_out_dim(std::size_t in_dim, std::size_t window, std::size_t stride) {
  if (window == 0 || stride == 0) throw ConfigError("pooling window and stride must be >= 1");
  if (in_dim < window) {
    throw ConfigError("pooling window " + std::to_string(window) + " exceeds input extent " +
                      std::to_string(in_dim));
  }
  if ((in_dim - window) % stride != 0) {
    throw ConfigError("pooling window " + std::to_string(window) + "/stride " +
                      std::to_string(stride) + " does not tile input extent " +
                      std::to_string(in_dim));
  }
  return (in_dim - window) / stride + 1;
}

template <typename T>
FixedPool<T>::FixedPool(PoolMode mode, std::size_t window_h, std::size_t window_w, std::size_t stride)
    : mode_(mode), window_h_(window_h), window_w_(window_w), stride_(stride) {
  if (window_h == 0 || window_w == 0 || stride == 0) {
    throw ConfigError("pooling window and stride must be >= 1");
  }
}

template <typename T>
Shape4 FixedPool<T>::bind(const Shape4& input) {
  return {input.batch, input.channels, pool_out_dim(input.height, window_h_, stride_),
          pool_out_dim(input.width, window_w_, stride_)};
}

template <typename T>
Tensor<T> FixedPool<T>::forward(const Tensor<T>& x, Mode) {
  input_shape_ = x.shape();
  output_shape_ = bind(x.shape());
  Tensor<T> out(output_shape_);
  const std::size_t oh = output_shape_.height;
  const std::size_t ow = output_shape_.width;
  const T inv_area = T{1} / static_cast<T>(window_h_ * window_w_);
  if (mode_ == PoolMode::Max) argmax_.assign(out.size(), 0);
  margin_ = std::numeric_limits<double>::infinity();
  std::size_t o = 0;
  for (std::size_t b = 0; b < x.batch(); ++b) {
    for (std::size_t c = 0; c < x.channels(); ++c) {
      for (std::size_t i = 0; i < oh; ++i) {
        for (std::size_t j = 0; j < ow; ++j, ++o) {
          if (mode_ == PoolMode::Average) {
            T sum{0};
            for (std::size_t dy = 0; dy < window_h_; ++dy) {
              for (std::size_t dx = 0; dx < window_w_; ++dx) {
                sum += x(b, c, i * stride_ + dy, j * stride_ + dx);
              }
            }
            out[o] = sum * inv_area;
          } else {
            std::size_t best = x.offset(b, c, i * stride_, j * stride_);
            T best_v = x[best];
            T runner_up = -std::numeric_limits<T>::infinity();
            for (std::size_t dy = 0; dy < window_h_; ++dy) {
              for (std::size_t dx = 0; dx < window_w_; ++dx) {
                if (dy == 0 && dx == 0) continue;
                const std::size_t idx = x.offset(b, c, i * stride_ + dy, j * stride_ + dx);
                if (x[idx] > best_v) {
                  runner_up = best_v;
                  best_v = x[idx];
                  best = idx;
                } else {
                  runner_up = std::max(runner_up, x[idx]);
                }
              }
            }
            out[o] = best_v;
            argmax_[o] = best;
            if (window_h_ * window_w_ > 1) {
              margin_ = std::min(margin_, static_cast<double>(best_v - runner_up));
            }
          }
        }
      }
    }
  }
  has_saved_ = true;
  return out;
}

template <typename T>
Tensor<T> FixedPool<T>::backward(const Tensor<T>& grad_out) {
  if (!has_saved_ || grad_out.shape() != output_shape_) {
    throw ShapeError("pool backward: grad_out " + grad_out.shape().str() +
                     " does not match saved forward output " + output_shape_.str());
  }
  Tensor<T> grad_in(input_shape_);
  if (mode_ == PoolMode::Max) {
    for (std::size_t o = 0; o < grad_out.size(); ++o) grad_in[argmax_[o]] += grad_out[o];
    return grad_in;
  }
  const T inv_area = T{1} / static_cast<T>(window_h_ * window_w_);
  std::size_t o = 0;
  for (std::size_t b = 0; b < output_shape_.batch; ++b) {
    for (std::size_t c = 0; c < output_shape_.channels; ++c) {
      for (std::size_t i = 0; i < output_shape_.height; ++i) {
        for (std::size_t j = 0; j < output_shape_.width; ++j, ++o) {
          const T g = grad_out[o] * inv_area;
          for (std::size_t dy = 0; dy < window_h_; ++dy) {
            for (std::size_t dx = 0; dx < window_w_; ++dx) {
              grad_in(b, c, i * stride_ + dy, j * stride_ + dx) += g;
            }
          }
        }
      }
    }
  }
  return grad_in;
}

template class FixedPool<float>;
template class FixedPool<double>;

}  // namespace percpool
