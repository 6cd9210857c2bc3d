#include "percpool/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace percpool {

namespace {

bool mul_overflows(std::size_t a, std::size_t b, std::size_t& out) {
  return __builtin_mul_overflow(a, b, &out);
}

template <typename U>
U to_little_endian(U v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    U r = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      r = static_cast<U>((r << 8) | ((v >> (8 * i)) & 0xFF));
    }
    return r;
  }
}

void write_u64(std::ostream& os, std::uint64_t v) {
  v = to_little_endian(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(v))) throw DataError("truncated tensor header");
  return to_little_endian(v);
}

template <typename T>
using BitsOf = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;

}  // namespace

std::size_t Shape4::numel() const {
  if (batch == 0 || channels == 0 || height == 0 || width == 0) {
    throw ShapeError("tensor extents must all be >= 1, got " + str());
  }
  std::size_t n = 0;
  if (mul_overflows(batch, channels, n) || mul_overflows(n, height, n) ||
      mul_overflows(n, width, n)) {
    throw std::overflow_error("tensor element count overflows size_t for " + str());
  }
  return n;
}

std::string Shape4::str() const {
  std::ostringstream os;
  os << '(' << batch << ',' << channels << ',' << height << ',' << width << ')';
  return os.str();
}

template <typename T>
Tensor<T>::Tensor(const Shape4& shape, std::vector<T> data) : shape_(shape), data_(data.begin(), data.end()) {
  if (data_.size() != shape_.numel()) {
    throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " +
                     shape_.str());
  }
}

template <typename T>
T Tensor<T>::at(std::size_t b, std::size_t c, std::size_t y, std::size_t x) const {
  if (b >= shape_.batch || c >= shape_.channels || y >= shape_.height || x >= shape_.width) {
    throw std::out_of_range("tensor index out of bounds for shape " + shape_.str());
  }
  return (*this)(b, c, y, x);
}

template <typename T>
void Tensor<T>::set(std::size_t b, std::size_t c, std::size_t y, std::size_t x, T value) {
  if (b >= shape_.batch || c >= shape_.channels || y >= shape_.height || x >= shape_.width) {
    throw std::out_of_range("tensor index out of bounds for shape " + shape_.str());
  }
  (*this)(b, c, y, x) = value;
}

template <typename T>
void Tensor<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
std::span<T> Tensor<T>::item(std::size_t b) {
  const std::size_t n = shape_.channels * shape_.height * shape_.width;
  return std::span<T>(data_).subspan(b * n, n);
}

template <typename T>
std::span<const T> Tensor<T>::item(std::size_t b) const {
  const std::size_t n = shape_.channels * shape_.height * shape_.width;
  return std::span<const T>(data_).subspan(b * n, n);
}

template <typename T>
Tensor<T> map_binary(const Tensor<T>& a, const Tensor<T>& b, BinaryOp op) {
  if (a.shape() != b.shape()) {
    throw ShapeError("map_binary shape mismatch: " + a.shape().str() + " vs " + b.shape().str());
  }
  Tensor<T> out(a.shape());
  const std::size_t n = a.size();
  switch (op) {
    case BinaryOp::Add:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
      break;
    case BinaryOp::Sub:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
      break;
    case BinaryOp::Mul:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
      break;
  }
  return out;
}

template <typename T>
T reduce(const Tensor<T>& t, ReduceOp op) {
  if (op == ReduceOp::Max) {
    T m = t[0];
    for (std::size_t i = 1; i < t.size(); ++i) m = std::max(m, t[i]);
    return m;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) acc += static_cast<double>(t[i]);
  if (op == ReduceOp::Mean) acc /= static_cast<double>(t.size());
  return static_cast<T>(acc);
}

template <typename T>
void write_tensor(std::ostream& os, const Tensor<T>& t) {
  const Shape4& s = t.shape();
  write_u64(os, s.batch);
  write_u64(os, s.channels);
  write_u64(os, s.height);
  write_u64(os, s.width);
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(t.raw()),
             static_cast<std::streamsize>(t.size() * sizeof(T)));
  } else {
    for (T v : t.data()) {
      auto bits = to_little_endian(std::bit_cast<BitsOf<T>>(v));
      os.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
    }
  }
  if (!os) throw DataError("failed writing tensor payload");
}

template <typename T>
Tensor<T> read_tensor(std::istream& is) {
  Shape4 s;
  s.batch = read_u64(is);
  s.channels = read_u64(is);
  s.height = read_u64(is);
  s.width = read_u64(is);
  std::size_t n = 0;
  try {
    n = s.numel();
  } catch (const std::exception& e) {
    throw DataError(std::string("bad tensor header: ") + e.what());
  }
  std::vector<T> data(n);
  if (!is.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(n * sizeof(T)))) {
    throw DataError("truncated tensor payload for shape " + s.str());
  }
  if constexpr (std::endian::native != std::endian::little) {
    for (T& v : data) v = std::bit_cast<T>(to_little_endian(std::bit_cast<BitsOf<T>>(v)));
  }
  return Tensor<T>(s, std::move(data));
}

bool all_finite(std::span<const float> v) {
  return std::all_of(v.begin(), v.end(), [](float x) { return std::isfinite(x); });
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

#define PERCPOOL_INSTANTIATE(T)                                              \
  template class Tensor<T>;                                                  \
  template Tensor<T> map_binary(const Tensor<T>&, const Tensor<T>&, BinaryOp); \
  template T reduce(const Tensor<T>&, ReduceOp);                             \
  template void write_tensor(std::ostream&, const Tensor<T>&);               \
  template Tensor<T> read_tensor<T>(std::istream&);

PERCPOOL_INSTANTIATE(float)
PERCPOOL_INSTANTIATE(double)

#undef PERCPOOL_INSTANTIATE

}  // namespace percpool
