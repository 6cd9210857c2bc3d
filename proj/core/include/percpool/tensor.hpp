#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <new>
#include <span>
#include <string>
#include <vector>

#include "percpool/errors.hpp"

namespace percpool {

/// 64-byte aligned storage. Vectorized GEMM peels by address, so without
/// this, float results vary with heap placement.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t alignment{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), alignment)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

/// Extents of a rank-4 (batch, channel, height, width) tensor.
struct Shape4 {
  std::size_t batch = 1;
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;

  /// Number of elements. Throws ShapeError on a zero extent and
  /// std::overflow_error if the product does not fit in size_t.
  std::size_t numel() const;

  /// Same extents with a different batch size.
  Shape4 with_batch(std::size_t n) const { return {n, channels, height, width}; }

  std::string str() const;

  friend bool operator==(const Shape4&, const Shape4&) = default;
};

/// Dense rank-4 array stored row-major in (b, c, y, x) order:
/// element (b,c,y,x) lives at ((b*C + c)*H + y)*W + x.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() : Tensor(Shape4{}) {}
  explicit Tensor(const Shape4& shape, T fill = T{})
      : shape_(shape), data_(shape.numel(), fill) {}
  Tensor(const Shape4& shape, std::vector<T> data);

  const Shape4& shape() const { return shape_; }
  std::size_t batch() const { return shape_.batch; }
  std::size_t channels() const { return shape_.channels; }
  std::size_t height() const { return shape_.height; }
  std::size_t width() const { return shape_.width; }
  std::size_t size() const { return data_.size(); }

  std::size_t offset(std::size_t b, std::size_t c, std::size_t y, std::size_t x) const {
    assert(b < shape_.batch && c < shape_.channels && y < shape_.height && x < shape_.width);
    return ((b * shape_.channels + c) * shape_.height + y) * shape_.width + x;
  }

  T& operator()(std::size_t b, std::size_t c, std::size_t y, std::size_t x) {
    return data_[offset(b, c, y, x)];
  }
  const T& operator()(std::size_t b, std::size_t c, std::size_t y, std::size_t x) const {
    return data_[offset(b, c, y, x)];
  }

  /// Bounds-checked read; throws std::out_of_range.
  T at(std::size_t b, std::size_t c, std::size_t y, std::size_t x) const;
  /// Bounds-checked write; throws std::out_of_range.
  void set(std::size_t b, std::size_t c, std::size_t y, std::size_t x, T value);

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  T* raw() { return data_.data(); }
  const T* raw() const { return data_.data(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  void fill(T value);

  /// Span over one (b) image: C*H*W contiguous values.
  std::span<T> item(std::size_t b);
  std::span<const T> item(std::size_t b) const;

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor<U>(shape_, std::move(out));
  }

 private:
  Shape4 shape_;
  std::vector<T, AlignedAllocator<T>> data_;
};

enum class BinaryOp { Add, Sub, Mul };
enum class ReduceOp { Sum, Max, Mean };

/// Elementwise a (op) b; shapes must match exactly (no broadcasting).
template <typename T>
Tensor<T> map_binary(const Tensor<T>& a, const Tensor<T>& b, BinaryOp op);

/// Scalar reduction over every element, accumulated in fixed index order.
template <typename T>
T reduce(const Tensor<T>& t, ReduceOp op);

/// Writes four little-endian u64 extents followed by the little-endian
/// IEEE-754 payload of width sizeof(T).
template <typename T>
void write_tensor(std::ostream& os, const Tensor<T>& t);

/// Inverse of write_tensor. Throws DataError on truncated input.
template <typename T>
Tensor<T> read_tensor(std::istream& is);

bool all_finite(std::span<const float> v);
bool all_finite(std::span<const double> v);

}  // namespace percpool
