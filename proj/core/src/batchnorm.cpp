#include "percpool/batchnorm.hpp"

#include <cmath>

namespace percpool {

template <typename T>
BatchNorm2d<T>::BatchNorm2d(std::size_t channels, double eps, double momentum)
    : channels_(channels),
      eps_(eps),
      momentum_(momentum),
      gamma_("gamma", {1, 1, 1, channels}),
      beta_("beta", {1, 1, 1, channels}),
      running_mean_({1, 1, 1, channels}, T{0}),
      running_var_({1, 1, 1, channels}, T{1}) {
  if (!(eps > 0.0)) throw ConfigError("batchnorm eps must be > 0");
  if (!(momentum > 0.0 && momentum < 1.0)) throw ConfigError("batchnorm momentum must be in (0,1)");
  gamma_.value.fill(T{1});
}

template <typename T>
Shape4 BatchNorm2d<T>::bind(const Shape4& input) {
  if (input.channels != channels_) {
    throw ConfigError("batchnorm expects " + std::to_string(channels_) + " channels, got " +
                      std::to_string(input.channels));
  }
  return input;
}

template <typename T>
Tensor<T> BatchNorm2d<T>::forward(const Tensor<T>& x, Mode mode) {
  if (x.channels() != channels_) throw ShapeError("batchnorm channel mismatch: " + x.shape().str());
  const std::size_t batch = x.batch();
  const std::size_t plane = x.height() * x.width();
  const double count = static_cast<double>(batch * plane);
  Tensor<T> out(x.shape());
  xhat_ = Tensor<T>(x.shape());
  inv_std_.assign(channels_, 0.0);
  for (std::size_t c = 0; c < channels_; ++c) {
    double mean = 0.0;
    double var = 0.0;
    if (mode == Mode::Train) {
      for (std::size_t b = 0; b < batch; ++b) {
        const T* p = &x(b, c, 0, 0);
        for (std::size_t i = 0; i < plane; ++i) mean += p[i];
      }
      mean /= count;
      for (std::size_t b = 0; b < batch; ++b) {
        const T* p = &x(b, c, 0, 0);
        for (std::size_t i = 0; i < plane; ++i) {
          const double d = p[i] - mean;
          var += d * d;
        }
      }
      var /= count;
      const double unbiased = count > 1.0 ? var * count / (count - 1.0) : var;
      running_mean_[c] = static_cast<T>((1.0 - momentum_) * running_mean_[c] + momentum_ * mean);
      running_var_[c] = static_cast<T>((1.0 - momentum_) * running_var_[c] + momentum_ * unbiased);
    } else {
      mean = running_mean_[c];
      var = running_var_[c];
    }
    const double inv_std = 1.0 / std::sqrt(var + eps_);
    inv_std_[c] = inv_std;
    const double g = gamma_.value[c];
    const double bt = beta_.value[c];
    for (std::size_t b = 0; b < batch; ++b) {
      const T* p = &x(b, c, 0, 0);
      T* xh = &xhat_(b, c, 0, 0);
      T* o = &out(b, c, 0, 0);
      for (std::size_t i = 0; i < plane; ++i) {
        const double n = (p[i] - mean) * inv_std;
        xh[i] = static_cast<T>(n);
        o[i] = static_cast<T>(g * n + bt);
      }
    }
  }
  mode_ = mode;
  has_saved_ = true;
  return out;
}

template <typename T>
Tensor<T> BatchNorm2d<T>::backward(const Tensor<T>& grad_out) {
  if (!has_saved_) throw ShapeError("batchnorm backward called before forward");
  if (grad_out.shape() != xhat_.shape()) {
    throw ShapeError("batchnorm grad_out shape mismatch: " + grad_out.shape().str());
  }
  const std::size_t batch = xhat_.batch();
  const std::size_t plane = xhat_.height() * xhat_.width();
  const double count = static_cast<double>(batch * plane);
  Tensor<T> grad_in(xhat_.shape());
  for (std::size_t c = 0; c < channels_; ++c) {
    double sum_dy = 0.0;
    double sum_dy_xhat = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      const T* dy = &grad_out(b, c, 0, 0);
      const T* xh = &xhat_(b, c, 0, 0);
      for (std::size_t i = 0; i < plane; ++i) {
        sum_dy += dy[i];
        sum_dy_xhat += static_cast<double>(dy[i]) * xh[i];
      }
    }
    gamma_.grad[c] += static_cast<T>(sum_dy_xhat);
    beta_.grad[c] += static_cast<T>(sum_dy);
    const double scale = gamma_.value[c] * inv_std_[c];
    for (std::size_t b = 0; b < batch; ++b) {
      const T* dy = &grad_out(b, c, 0, 0);
      const T* xh = &xhat_(b, c, 0, 0);
      T* dx = &grad_in(b, c, 0, 0);
      for (std::size_t i = 0; i < plane; ++i) {
        if (mode_ == Mode::Train) {
          dx[i] = static_cast<T>(scale * (dy[i] - sum_dy / count - xh[i] * sum_dy_xhat / count));
        } else {
          dx[i] = static_cast<T>(scale * dy[i]);
        }
      }
    }
  }
  return grad_in;
}

template class BatchNorm2d<float>;
template class BatchNorm2d<double>;

}  // namespace percpool
