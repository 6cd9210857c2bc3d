#include "percpool/conv2d.hpp"

#include <Eigen/Core>

namespace percpool {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Geometry {
  std::size_t in_h, in_w, out_h, out_w;
};

Geometry geometry(const Conv2dConfig& c, std::size_t in_h, std::size_t in_w) {
  if (in_h + 2 * c.pad < c.kernel_h || in_w + 2 * c.pad < c.kernel_w) {
    throw ConfigError("conv2d kernel larger than padded input");
  }
  return {in_h, in_w, (in_h + 2 * c.pad - c.kernel_h) / c.stride + 1,
          (in_w + 2 * c.pad - c.kernel_w) / c.stride + 1};
}

// Rows index (ci, ky, kx); columns index output positions (oy, ox).
template <typename T>
void im2col(const T* img, const Conv2dConfig& c, const Geometry& g, T* col) {
  const std::size_t p = g.out_h * g.out_w;
  std::size_t row = 0;
  for (std::size_t ci = 0; ci < c.in_channels; ++ci) {
    const T* plane = img + ci * g.in_h * g.in_w;
    for (std::size_t ky = 0; ky < c.kernel_h; ++ky) {
      for (std::size_t kx = 0; kx < c.kernel_w; ++kx, ++row) {
        T* dst = col + row * p;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const long iy = static_cast<long>(oy * c.stride + ky) - static_cast<long>(c.pad);
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const long ix = static_cast<long>(ox * c.stride + kx) - static_cast<long>(c.pad);
            const bool inside = iy >= 0 && ix >= 0 && iy < static_cast<long>(g.in_h) &&
                                ix < static_cast<long>(g.in_w);
            dst[oy * g.out_w + ox] = inside ? plane[iy * g.in_w + ix] : T{0};
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* col, const Conv2dConfig& c, const Geometry& g, T* img) {
  const std::size_t p = g.out_h * g.out_w;
  std::size_t row = 0;
  for (std::size_t ci = 0; ci < c.in_channels; ++ci) {
    T* plane = img + ci * g.in_h * g.in_w;
    for (std::size_t ky = 0; ky < c.kernel_h; ++ky) {
      for (std::size_t kx = 0; kx < c.kernel_w; ++kx, ++row) {
        const T* src = col + row * p;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const long iy = static_cast<long>(oy * c.stride + ky) - static_cast<long>(c.pad);
          if (iy < 0 || iy >= static_cast<long>(g.in_h)) continue;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const long ix = static_cast<long>(ox * c.stride + kx) - static_cast<long>(c.pad);
            if (ix < 0 || ix >= static_cast<long>(g.in_w)) continue;
            plane[iy * g.in_w + ix] += src[oy * g.out_w + ox];
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Conv2d<T>::Conv2d(const Conv2dConfig& config)
    : config_(config),
      weight_("weight", {config.out_channels, config.in_channels, config.kernel_h, config.kernel_w}),
      bias_("bias", {1, 1, 1, config.out_channels}) {
  if (config.stride < 1) throw ConfigError("conv2d stride must be >= 1");
}

template <typename T>
Shape4 Conv2d<T>::bind(const Shape4& input) {
  if (input.channels != config_.in_channels) {
    throw ConfigError("conv2d expects " + std::to_string(config_.in_channels) +
                      " input channels, got " + std::to_string(input.channels));
  }
  const Geometry g = geometry(config_, input.height, input.width);
  return {input.batch, config_.out_channels, g.out_h, g.out_w};
}

template <typename T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& x, Mode) {
  if (x.channels() != config_.in_channels) {
    throw ShapeError("conv2d input channel mismatch: " + x.shape().str());
  }
  const Geometry g = geometry(config_, x.height(), x.width());
  const std::size_t k = config_.in_channels * config_.kernel_h * config_.kernel_w;
  const std::size_t p = g.out_h * g.out_w;
  Tensor<T> out({x.batch(), config_.out_channels, g.out_h, g.out_w});
  RowMat<T> col(k, p);
  Eigen::Map<const RowMat<T>> w(weight_.value.raw(), config_.out_channels, k);
  Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> b(bias_.value.raw(), config_.out_channels);
  for (std::size_t n = 0; n < x.batch(); ++n) {
    im2col(x.item(n).data(), config_, g, col.data());
    Eigen::Map<RowMat<T>> y(out.item(n).data(), config_.out_channels, p);
    y.noalias() = w * col;
    y.colwise() += b;
  }
  input_ = x;
  has_input_ = true;
  return out;
}

template <typename T>
Tensor<T> Conv2d<T>::backward(const Tensor<T>& grad_out) {
  if (!has_input_) throw ShapeError("conv2d backward called before forward");
  const Geometry g = geometry(config_, input_.height(), input_.width());
  const Shape4 expected{input_.batch(), config_.out_channels, g.out_h, g.out_w};
  if (grad_out.shape() != expected) {
    throw ShapeError("conv2d grad_out shape " + grad_out.shape().str() + " != " + expected.str());
  }
  const std::size_t k = config_.in_channels * config_.kernel_h * config_.kernel_w;
  const std::size_t p = g.out_h * g.out_w;
  Tensor<T> grad_in(input_.shape());
  RowMat<T> col(k, p);
  RowMat<T> dcol(k, p);
  Eigen::Map<const RowMat<T>> w(weight_.value.raw(), config_.out_channels, k);
  Eigen::Map<RowMat<T>> dw(weight_.grad.raw(), config_.out_channels, k);
  Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> db(bias_.grad.raw(), config_.out_channels);
  for (std::size_t n = 0; n < input_.batch(); ++n) {
    Eigen::Map<const RowMat<T>> gy(grad_out.item(n).data(), config_.out_channels, p);
    im2col(input_.item(n).data(), config_, g, col.data());
    dw.noalias() += gy * col.transpose();
    db += gy.rowwise().sum();
    dcol.noalias() = w.transpose() * gy;
    col2im_add(dcol.data(), config_, g, grad_in.item(n).data());
  }
  return grad_in;
}

template class Conv2d<float>;
template class Conv2d<double>;

}  // namespace percpool
