#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "percpool/tensor.hpp"

namespace percpool {

/// One image as raw bytes in (c, y, x) order plus its class.
struct LabeledImage {
  int label = 0;
  std::size_t channels = 3;
  std::size_t height = 32;
  std::size_t width = 32;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(std::size_t c, std::size_t y, std::size_t x) const {
    return pixels[(c * height + y) * width + x];
  }
};

inline constexpr std::size_t kCifarSide = 32;
inline constexpr std::size_t kCifarRecordBytes = 1 + 3 * kCifarSide * kCifarSide;
inline constexpr int kCifarClasses = 10;

/// Parses CIFAR-10 binary records: 1 label byte then 1024 R, 1024 G, 1024 B
/// bytes, each plane row-major. Throws DataError on truncation or a label > 9.
std::vector<LabeledImage> parse_cifar10(std::span<const std::uint8_t> bytes,
                                        const std::string& source = "<memory>");
std::vector<LabeledImage> load_cifar10(const std::filesystem::path& file);

enum class Split { Train, Test };

/// Loads data_batch_1..5.bin (train) or test_batch.bin (test) from `root`
/// or from `root`/cifar-10-batches-bin.
std::vector<LabeledImage> load_cifar10_split(const std::filesystem::path& root, Split split);

/// Directory under `root` holding the CIFAR-10 .bin files, if any.
std::optional<std::filesystem::path> find_cifar10_dir(const std::filesystem::path& root);

/// Serializes 3x32x32 images in the CIFAR-10 binary layout.
void write_cifar10(const std::filesystem::path& file, std::span<const LabeledImage> images);

/// Per-channel affine normalization (x - mean[c]) / scale.
struct Normalization {
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  double scale = 1.0;
};

/// Mean subtraction (122.782, 117.001, 104.298) and division by 256.
Normalization cifar10_normalization();

template <typename T>
void normalize_into(const LabeledImage& img, const Normalization& norm, std::span<T> out);

/// (1, C, H, W) tensor of normalized values.
template <typename T>
Tensor<T> normalize(const LabeledImage& img, const Normalization& norm);

/// Inverse of normalize, rounded to the nearest byte and clamped to [0, 255].
template <typename T>
std::vector<std::uint8_t> denormalize(const Tensor<T>& t, const Normalization& norm);

/// Crop of the image after zero-padding `pad` pixels on every side; offsets
/// range over 0..2*pad per axis and (pad, pad) returns the original.
LabeledImage crop_padded(const LabeledImage& img, std::size_t offset_y, std::size_t offset_x,
                         std::size_t pad = 4);

/// crop_padded with uniformly random offsets.
LabeledImage augment_crop(const LabeledImage& img, std::mt19937_64& rng, std::size_t pad = 4);

struct BatchSpec {
  std::size_t batch_size = 50;
  bool balanced = true;
  std::uint64_t seed = 0;
  std::size_t classes = kCifarClasses;

  /// Throws ConfigError if the batch size is 0 or, in balanced mode, not a multiple of classes.
  void validate() const;
};

/// Index batches for one epoch. Balanced mode draws batch_size/classes
/// examples of every class per batch without replacement and stops when any
/// class runs out; unbalanced mode shuffles everything. Incomplete trailing
/// batches are dropped. Deterministic in (seed, epoch).
std::vector<std::vector<std::size_t>> plan_epoch(std::span<const int> labels, const BatchSpec& spec,
                                                 std::size_t epoch);

template <typename T>
struct Batch {
  Tensor<T> images;
  std::vector<int> labels;
};

/// Stacks the indexed images into one normalized tensor, applying a random
/// crop to each when `augment_rng` is given.
template <typename T>
Batch<T> assemble_batch(std::span<const LabeledImage> data, std::span<const std::size_t> indices,
                        const Normalization& norm, std::mt19937_64* augment_rng = nullptr);

/// Single-pass iterator over one epoch's batches.
template <typename T>
class BatchStream {
 public:
  BatchStream(std::span<const LabeledImage> data, const BatchSpec& spec, std::size_t epoch,
              Normalization norm, bool augment);

  std::size_t size() const { return plan_.size(); }
  std::optional<Batch<T>> next();

 private:
  std::span<const LabeledImage> data_;
  std::vector<std::vector<std::size_t>> plan_;
  Normalization norm_;
  bool augment_;
  std::mt19937_64 rng_;
  std::size_t cursor_ = 0;
};

std::vector<int> labels_of(std::span<const LabeledImage> data);

/// Gaussian-blob images of side `size` (3 channels): class k puts a bright
/// blob in its own cell of a 4x4 grid, so the class survives any x4
/// downscale. Classes are assigned round-robin; at most 16 classes.
std::vector<LabeledImage> synth_dataset(std::size_t n, int classes, std::uint64_t seed,
                                        std::size_t size = 16);

}  // namespace percpool
