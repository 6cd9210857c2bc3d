#include "percpool/perceptron_pool.hpp"

#include <algorithm>
#include <cmath>

#include "percpool/fixed_pool.hpp"

namespace percpool {

std::size_t unit_grid_side(std::size_t units) {
  if (units == 0) throw ConfigError("perceptron units must be >= 1");
  auto q = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(units))));
  while (q * q > units) --q;
  while ((q + 1) * (q + 1) <= units) ++q;
  if (q * q != units) {
    throw ConfigError("perceptron units must be a perfect square to restructure, got " +
                      std::to_string(units));
  }
  return q;
}

GridPos restructure(std::size_t unit, std::size_t i, std::size_t j, std::size_t units) {
  const std::size_t q = unit_grid_side(units);
  if (unit >= units) throw ConfigError("unit index out of range");
  return {i * q + unit / q, j * q + unit % q};
}

std::size_t instance_count(SharingMode sharing, std::size_t channels, std::size_t out_h,
                           std::size_t out_w) {
  switch (sharing) {
    case SharingMode::Global: return 1;
    case SharingMode::PerChannel: return channels;
    case SharingMode::PerField: return out_h * out_w;
    case SharingMode::PerTensor: return channels * out_h * out_w;
  }
  return 1;
}

std::size_t param_count(const PerceptronPoolConfig& config, std::size_t instances) {
  return instances * config.units * (config.window_h * config.window_w + (config.use_bias ? 1 : 0));
}

std::size_t param_count(const PerceptronPoolConfig& config, const Shape4& input) {
  const std::size_t oh = pool_out_dim(input.height, config.window_h, config.stride);
  const std::size_t ow = pool_out_dim(input.width, config.window_w, config.stride);
  return param_count(config, instance_count(config.sharing, input.channels, oh, ow));
}

const char* to_string(SharingMode mode) {
  switch (mode) {
    case SharingMode::Global: return "global";
    case SharingMode::PerChannel: return "per_channel";
    case SharingMode::PerField: return "per_field";
    case SharingMode::PerTensor: return "per_tensor";
  }
  return "?";
}

const char* to_string(Activation act) { return act == Activation::Relu ? "relu" : "identity"; }

SharingMode parse_sharing(const std::string& s) {
  if (s == "global") return SharingMode::Global;
  if (s == "per_channel" || s == "z") return SharingMode::PerChannel;
  if (s == "per_field" || s == "field") return SharingMode::PerField;
  if (s == "per_tensor" || s == "tensor") return SharingMode::PerTensor;
  throw ConfigError("unknown sharing mode '" + s + "'");
}

Activation parse_activation(const std::string& s) {
  if (s == "identity" || s == "none" || s == "linear") return Activation::Identity;
  if (s == "relu") return Activation::Relu;
  throw ConfigError("unknown activation '" + s + "'");
}

template <typename T>
PerceptronPool<T>::PerceptronPool(const PerceptronPoolConfig& config, Padding pad)
    : config_(config), pad_(pad) {
  if (config.window_h == 0 || config.window_w == 0 || config.stride == 0) {
    throw ConfigError("perceptron pool window and stride must be >= 1");
  }
  if (config.lr_factor < 0.0 || config.wd_factor < 0.0) {
    throw ConfigError("perceptron pool lr/wd factors must be >= 0");
  }
  q_ = unit_grid_side(config.units);
  if (config.sharing == SharingMode::Global) allocate(1);
}

template <typename T>
void PerceptronPool<T>::allocate(std::size_t instances) {
  instances_ = instances;
  weight_ = Parameter<T>("weight", {instances, config_.units, config_.window_h, config_.window_w},
                         config_.lr_factor, config_.wd_factor);
  weight_.value.fill(T{1} / static_cast<T>(config_.window_h * config_.window_w));
  bias_ = Parameter<T>("bias", {1, 1, instances, config_.units}, config_.lr_factor,
                       config_.wd_factor);
  bound_ = true;
}

template <typename T>
std::vector<Parameter<T>*> PerceptronPool<T>::own_parameters() {
  if (!bound_) return {};
  if (config_.use_bias) return {&weight_, &bias_};
  return {&weight_};
}

template <typename T>
Shape4 PerceptronPool<T>::bind(const Shape4& input) {
  const std::size_t oh =
      pool_out_dim(input.height + pad_.top + pad_.bottom, config_.window_h, config_.stride);
  const std::size_t ow =
      pool_out_dim(input.width + pad_.left + pad_.right, config_.window_w, config_.stride);
  const Shape4 key = input.with_batch(1);
  if (config_.sharing != SharingMode::Global) {
    if (bound_ && key != bound_input_) {
      throw ConfigError(std::string(to_string(config_.sharing)) + " perceptron pool was bound to " +
                        bound_input_.str() + ", cannot re-bind to " + key.str());
    }
    if (!bound_) allocate(instance_count(config_.sharing, input.channels, oh, ow));
  }
  bound_input_ = key;
  out_h_ = oh;
  out_w_ = ow;
  return {input.batch, input.channels, oh * q_, ow * q_};
}

template <typename T>
std::size_t PerceptronPool<T>::instance_index(std::size_t c, std::size_t i, std::size_t j) const {
  switch (config_.sharing) {
    case SharingMode::Global: return 0;
    case SharingMode::PerChannel: return c;
    case SharingMode::PerField: return i * out_w_ + j;
    case SharingMode::PerTensor: return (c * out_h_ + i) * out_w_ + j;
  }
  return 0;
}

template <typename T>
void PerceptronPool<T>::broadcast(std::span<const T> weights, std::span<const T> biases) {
  if (!bound_) throw ConfigError("perceptron pool must be bound before broadcast");
  const std::size_t per = config_.units * config_.window_h * config_.window_w;
  if (weights.size() != per) throw ShapeError("broadcast weight count mismatch");
  if (config_.use_bias && biases.size() != config_.units) {
    throw ShapeError("broadcast bias count mismatch");
  }
  for (std::size_t inst = 0; inst < instances_; ++inst) {
    std::copy(weights.begin(), weights.end(), weight_.value.raw() + inst * per);
    if (config_.use_bias) {
      std::copy(biases.begin(), biases.end(), bias_.value.raw() + inst * config_.units);
    }
  }
}

namespace {

// Valid kernel offsets [lo, hi) for a window starting at `start` (may be
// negative because of padding) over an axis of length `extent`.
struct Span1 {
  std::size_t lo;
  std::size_t hi;
  long start;
};

Span1 valid_span(long start, std::size_t window, std::size_t extent) {
  const long lo = std::max(0L, -start);
  const long hi = std::min(static_cast<long>(window), static_cast<long>(extent) - start);
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(std::max(lo, hi)), start};
}

}  // namespace

template <typename T>
Tensor<T> PerceptronPool<T>::forward(const Tensor<T>& x, Mode) {
  const Shape4 out_shape = bind(x.shape());
  Tensor<T> out(out_shape);
  const bool relu = config_.activation == Activation::Relu;
  if (relu) pre_ = Tensor<T>(out_shape);
  const std::size_t wh = config_.window_h;
  const std::size_t ww = config_.window_w;
  const std::size_t units = config_.units;
  const std::size_t H = x.height();
  const std::size_t W = x.width();
  const T* weights = weight_.value.raw();
  const T* biases = bias_.value.raw();
  for (std::size_t b = 0; b < x.batch(); ++b) {
    for (std::size_t c = 0; c < x.channels(); ++c) {
      const T* plane = &x(b, c, 0, 0);
      for (std::size_t i = 0; i < out_h_; ++i) {
        const Span1 ys = valid_span(static_cast<long>(i * config_.stride) - static_cast<long>(pad_.top), wh, H);
        for (std::size_t j = 0; j < out_w_; ++j) {
          const Span1 xs =
              valid_span(static_cast<long>(j * config_.stride) - static_cast<long>(pad_.left), ww, W);
          const std::size_t inst = instance_index(c, i, j);
          for (std::size_t k = 0; k < units; ++k) {
            const T* w = weights + (inst * units + k) * wh * ww;
            T acc{0};
            for (std::size_t dy = ys.lo; dy < ys.hi; ++dy) {
              const T* row = plane + static_cast<std::size_t>(ys.start + static_cast<long>(dy)) * W;
              for (std::size_t dx = xs.lo; dx < xs.hi; ++dx) {
                acc += w[dy * ww + dx] * row[static_cast<std::size_t>(xs.start + static_cast<long>(dx))];
              }
            }
            if (config_.use_bias) acc += biases[inst * units + k];
            const std::size_t oy = i * q_ + k / q_;
            const std::size_t ox = j * q_ + k % q_;
            if (relu) {
              pre_(b, c, oy, ox) = acc;
              acc = acc > T{0} ? acc : T{0};
            }
            out(b, c, oy, ox) = acc;
          }
        }
      }
    }
  }
  input_ = x;
  has_saved_ = true;
  return out;
}

template <typename T>
Tensor<T> PerceptronPool<T>::backward(const Tensor<T>& grad_out) {
  if (!has_saved_) throw ShapeError("perceptron pool backward called before forward");
  const Shape4 expected{input_.batch(), input_.channels(), out_h_ * q_, out_w_ * q_};
  if (grad_out.shape() != expected) {
    throw ShapeError("perceptron pool grad_out " + grad_out.shape().str() +
                     " does not match saved forward output " + expected.str());
  }
  Tensor<T> grad_in(input_.shape());
  const bool relu = config_.activation == Activation::Relu;
  const std::size_t wh = config_.window_h;
  const std::size_t ww = config_.window_w;
  const std::size_t units = config_.units;
  const std::size_t H = input_.height();
  const std::size_t W = input_.width();
  const T* weights = weight_.value.raw();
  T* dweights = weight_.grad.raw();
  T* dbiases = bias_.grad.raw();
  for (std::size_t b = 0; b < input_.batch(); ++b) {
    for (std::size_t c = 0; c < input_.channels(); ++c) {
      const T* plane = &input_(b, c, 0, 0);
      T* gplane = &grad_in(b, c, 0, 0);
      for (std::size_t i = 0; i < out_h_; ++i) {
        const Span1 ys = valid_span(static_cast<long>(i * config_.stride) - static_cast<long>(pad_.top), wh, H);
        for (std::size_t j = 0; j < out_w_; ++j) {
          const Span1 xs =
              valid_span(static_cast<long>(j * config_.stride) - static_cast<long>(pad_.left), ww, W);
          const std::size_t inst = instance_index(c, i, j);
          for (std::size_t k = 0; k < units; ++k) {
            const std::size_t oy = i * q_ + k / q_;
            const std::size_t ox = j * q_ + k % q_;
            T g = grad_out(b, c, oy, ox);
            if (relu && !(pre_(b, c, oy, ox) > T{0})) g = T{0};
            if (g == T{0}) continue;
            const std::size_t wbase = (inst * units + k) * wh * ww;
            if (config_.use_bias) dbiases[inst * units + k] += g;
            for (std::size_t dy = ys.lo; dy < ys.hi; ++dy) {
              const std::size_t y = static_cast<std::size_t>(ys.start + static_cast<long>(dy));
              for (std::size_t dx = xs.lo; dx < xs.hi; ++dx) {
                const std::size_t xx = static_cast<std::size_t>(xs.start + static_cast<long>(dx));
                dweights[wbase + dy * ww + dx] += g * plane[y * W + xx];
                gplane[y * W + xx] += g * weights[wbase + dy * ww + dx];
              }
            }
          }
        }
      }
    }
  }
  return grad_in;
}

template <typename T>
double PerceptronPool<T>::kink_margin() const {
  double m = std::numeric_limits<double>::infinity();
  if (config_.activation != Activation::Relu || !has_saved_) return m;
  for (T v : pre_.data()) m = std::min(m, std::abs(static_cast<double>(v)));
  return m;
}

PerceptronPoolConfig PerceptronUpsampleConfig::as_pool_config() const {
  PerceptronPoolConfig c;
  c.window_h = window_h;
  c.window_w = window_w;
  c.stride = 1;
  c.units = factor * factor;
  c.use_bias = use_bias;
  c.activation = activation;
  c.sharing = sharing;
  c.lr_factor = lr_factor;
  c.wd_factor = wd_factor;
  return c;
}

Padding PerceptronUpsampleConfig::padding() const {
  const std::size_t th = window_h - 1;
  const std::size_t tw = window_w - 1;
  return {th - th / 2, th / 2, tw - tw / 2, tw / 2};
}

namespace {
const PerceptronUpsampleConfig& check_upsample(const PerceptronUpsampleConfig& c) {
  if (c.factor < 2) throw ConfigError("perceptron upsample factor must be >= 2");
  if (c.window_h == 0 || c.window_w == 0) throw ConfigError("upsample window must be >= 1");
  return c;
}
}  // namespace

template <typename T>
PerceptronUpsample<T>::PerceptronUpsample(const PerceptronUpsampleConfig& config)
    : PerceptronPool<T>(check_upsample(config).as_pool_config(), config.padding()),
      factor_(config.factor) {}

template class PerceptronPool<float>;
template class PerceptronPool<double>;
template class PerceptronUpsample<float>;
template class PerceptronUpsample<double>;

}  // namespace percpool
