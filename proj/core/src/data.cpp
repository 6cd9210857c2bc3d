#include "percpool/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

namespace percpool {

std::vector<LabeledImage> parse_cifar10(std::span<const std::uint8_t> bytes, const std::string& source) {
  if (bytes.empty() || bytes.size() % kCifarRecordBytes != 0) {
    throw DataError(source + ": truncated CIFAR-10 file (" + std::to_string(bytes.size()) +
                    " bytes is not a positive multiple of " + std::to_string(kCifarRecordBytes) + ")");
  }
  const std::size_t n = bytes.size() / kCifarRecordBytes;
  std::vector<LabeledImage> out;
  out.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::uint8_t* rec = bytes.data() + r * kCifarRecordBytes;
    if (rec[0] >= kCifarClasses) {
      throw DataError(source + ": record " + std::to_string(r) + " has label " +
                      std::to_string(rec[0]) + " > 9");
    }
    LabeledImage img;
    img.label = rec[0];
    img.pixels.assign(rec + 1, rec + kCifarRecordBytes);
    out.push_back(std::move(img));
  }
  return out;
}

std::vector<LabeledImage> load_cifar10(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw DataError("cannot open " + file.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_cifar10(bytes, file.string());
}

std::optional<std::filesystem::path> find_cifar10_dir(const std::filesystem::path& root) {
  for (const auto& dir : {root, root / "cifar-10-batches-bin"}) {
    if (std::filesystem::exists(dir / "test_batch.bin") ||
        std::filesystem::exists(dir / "data_batch_1.bin")) {
      return dir;
    }
  }
  return std::nullopt;
}

std::vector<LabeledImage> load_cifar10_split(const std::filesystem::path& root, Split split) {
  const auto dir = find_cifar10_dir(root);
  if (!dir) throw DataError("no CIFAR-10 binary files under " + root.string());
  std::vector<std::string> files;
  if (split == Split::Train) {
    for (int i = 1; i <= 5; ++i) files.push_back("data_batch_" + std::to_string(i) + ".bin");
  } else {
    files.push_back("test_batch.bin");
  }
  std::vector<LabeledImage> out;
  for (const auto& f : files) {
    auto part = load_cifar10(*dir / f);
    out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return out;
}

void write_cifar10(const std::filesystem::path& file, std::span<const LabeledImage> images) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw DataError("cannot write " + file.string());
  for (const auto& img : images) {
    if (img.channels != 3 || img.height != kCifarSide || img.width != kCifarSide ||
        img.pixels.size() != kCifarRecordBytes - 1) {
      throw DataError("write_cifar10 needs 3x32x32 images");
    }
    out.put(static_cast<char>(img.label));
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
  }
}

Normalization cifar10_normalization() { return {{122.782, 117.001, 104.298}, 256.0}; }

template <typename T>
void normalize_into(const LabeledImage& img, const Normalization& norm, std::span<T> out) {
  const std::size_t plane = img.height * img.width;
  if (out.size() != img.channels * plane) throw ShapeError("normalize: output size mismatch");
  for (std::size_t c = 0; c < img.channels; ++c) {
    const double mean = norm.mean[std::min<std::size_t>(c, 2)];
    for (std::size_t i = 0; i < plane; ++i) {
      out[c * plane + i] = static_cast<T>((img.pixels[c * plane + i] - mean) / norm.scale);
    }
  }
}

template <typename T>
Tensor<T> normalize(const LabeledImage& img, const Normalization& norm) {
  Tensor<T> t({1, img.channels, img.height, img.width});
  normalize_into(img, norm, t.data());
  return t;
}

template <typename T>
std::vector<std::uint8_t> denormalize(const Tensor<T>& t, const Normalization& norm) {
  std::vector<std::uint8_t> out(t.size());
  const std::size_t plane = t.height() * t.width();
  for (std::size_t i = 0; i < t.size(); ++i) {
    const std::size_t c = (i / plane) % t.channels();
    const double v = static_cast<double>(t[i]) * norm.scale + norm.mean[std::min<std::size_t>(c, 2)];
    out[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
  return out;
}

LabeledImage crop_padded(const LabeledImage& img, std::size_t offset_y, std::size_t offset_x,
                         std::size_t pad) {
  if (offset_y > 2 * pad || offset_x > 2 * pad) throw ConfigError("crop offset outside padded image");
  LabeledImage out = img;
  std::fill(out.pixels.begin(), out.pixels.end(), 0);
  for (std::size_t c = 0; c < img.channels; ++c) {
    for (std::size_t y = 0; y < img.height; ++y) {
      const long sy = static_cast<long>(y + offset_y) - static_cast<long>(pad);
      if (sy < 0 || sy >= static_cast<long>(img.height)) continue;
      for (std::size_t x = 0; x < img.width; ++x) {
        const long sx = static_cast<long>(x + offset_x) - static_cast<long>(pad);
        if (sx < 0 || sx >= static_cast<long>(img.width)) continue;
        out.pixels[(c * img.height + y) * img.width + x] =
            img.at(c, static_cast<std::size_t>(sy), static_cast<std::size_t>(sx));
      }
    }
  }
  return out;
}

LabeledImage augment_crop(const LabeledImage& img, std::mt19937_64& rng, std::size_t pad) {
  std::uniform_int_distribution<std::size_t> offset(0, 2 * pad);
  const std::size_t oy = offset(rng);
  const std::size_t ox = offset(rng);
  return crop_padded(img, oy, ox, pad);
}

void BatchSpec::validate() const {
  if (batch_size == 0) throw ConfigError("batch size must be >= 1");
  if (classes == 0) throw ConfigError("class count must be >= 1");
  if (balanced && batch_size % classes != 0) {
    throw ConfigError("balanced batch size " + std::to_string(batch_size) +
                      " is not a multiple of the class count " + std::to_string(classes));
  }
}

namespace {
std::mt19937_64 epoch_rng(std::uint64_t seed, std::size_t epoch) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), 0x5EEDu};
  return std::mt19937_64(seq);
}
}  // namespace

std::vector<std::vector<std::size_t>> plan_epoch(std::span<const int> labels, const BatchSpec& spec,
                                                 std::size_t epoch) {
  spec.validate();
  auto rng = epoch_rng(spec.seed, epoch);
  std::vector<std::vector<std::size_t>> batches;
  if (!spec.balanced) {
    std::vector<std::size_t> order(labels.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start + spec.batch_size <= order.size(); start += spec.batch_size) {
      batches.emplace_back(order.begin() + static_cast<long>(start),
                           order.begin() + static_cast<long>(start + spec.batch_size));
    }
    return batches;
  }
  std::vector<std::vector<std::size_t>> by_class(spec.classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    if (l < 0 || static_cast<std::size_t>(l) >= spec.classes) {
      throw DataError("label " + std::to_string(l) + " outside class range");
    }
    by_class[static_cast<std::size_t>(l)].push_back(i);
  }
  std::size_t available = labels.size();
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    available = std::min(available, members.size());
  }
  const std::size_t per_class = spec.batch_size / spec.classes;
  const std::size_t count = available / per_class;
  for (std::size_t b = 0; b < count; ++b) {
    std::vector<std::size_t> batch;
    batch.reserve(spec.batch_size);
    for (const auto& members : by_class) {
      for (std::size_t k = 0; k < per_class; ++k) batch.push_back(members[b * per_class + k]);
    }
    std::shuffle(batch.begin(), batch.end(), rng);
    batches.push_back(std::move(batch));
  }
  return batches;
}

template <typename T>
Batch<T> assemble_batch(std::span<const LabeledImage> data, std::span<const std::size_t> indices,
                        const Normalization& norm, std::mt19937_64* augment_rng) {
  if (indices.empty()) throw DataError("cannot assemble an empty batch");
  const LabeledImage& first = data[indices[0]];
  Batch<T> batch{Tensor<T>({indices.size(), first.channels, first.height, first.width}), {}};
  batch.labels.reserve(indices.size());
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const LabeledImage& img = data[indices[b]];
    if (img.channels != first.channels || img.height != first.height || img.width != first.width) {
      throw DataError("images in one batch must share a shape");
    }
    if (augment_rng != nullptr) {
      normalize_into(augment_crop(img, *augment_rng), norm, batch.images.item(b));
    } else {
      normalize_into(img, norm, batch.images.item(b));
    }
    batch.labels.push_back(img.label);
  }
  return batch;
}

std::vector<int> labels_of(std::span<const LabeledImage> data) {
  std::vector<int> out(data.size());
  std::transform(data.begin(), data.end(), out.begin(), [](const LabeledImage& i) { return i.label; });
  return out;
}

template <typename T>
BatchStream<T>::BatchStream(std::span<const LabeledImage> data, const BatchSpec& spec,
                            std::size_t epoch, Normalization norm, bool augment)
    : data_(data), norm_(norm), augment_(augment), rng_(epoch_rng(spec.seed ^ 0xA5A5A5A5ULL, epoch)) {
  const auto labels = labels_of(data);
  plan_ = plan_epoch(labels, spec, epoch);
}

template <typename T>
std::optional<Batch<T>> BatchStream<T>::next() {
  if (cursor_ >= plan_.size()) return std::nullopt;
  return assemble_batch<T>(data_, plan_[cursor_++], norm_, augment_ ? &rng_ : nullptr);
}

std::vector<LabeledImage> synth_dataset(std::size_t n, int classes, std::uint64_t seed, std::size_t size) {
  if (classes < 1 || classes > 16) throw ConfigError("synthetic dataset supports 1..16 classes");
  if (size < 4 || size % 4 != 0) throw ConfigError("synthetic image size must be a multiple of 4");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 12.0);
  const double cell = static_cast<double>(size) / 4.0;
  const double sigma = static_cast<double>(size) / 10.0;
  std::vector<LabeledImage> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % static_cast<std::size_t>(classes));
    const long idx = classes == 1 ? 0 : std::lround(label * 15.0 / (classes - 1));
    const double cy = (idx / 4) * cell + cell / 2.0 - 0.5 + jitter(rng);
    const double cx = (idx % 4) * cell + cell / 2.0 - 0.5 + jitter(rng);
    LabeledImage img;
    img.label = label;
    img.channels = 3;
    img.height = size;
    img.width = size;
    img.pixels.resize(3 * size * size);
    for (std::size_t c = 0; c < 3; ++c) {
      const double amplitude = 170.0 + 20.0 * static_cast<double>(c);
      for (std::size_t y = 0; y < size; ++y) {
        for (std::size_t x = 0; x < size; ++x) {
          const double d2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
          const double v = 40.0 + amplitude * std::exp(-d2 / (2.0 * sigma * sigma)) + noise(rng);
          img.pixels[(c * size + y) * size + x] =
              static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
      }
    }
    out.push_back(std::move(img));
  }
  return out;
}

#define PERCPOOL_INSTANTIATE(T)                                                                 \
  template void normalize_into(const LabeledImage&, const Normalization&, std::span<T>);        \
  template Tensor<T> normalize(const LabeledImage&, const Normalization&);                      \
  template std::vector<std::uint8_t> denormalize(const Tensor<T>&, const Normalization&);       \
  template Batch<T> assemble_batch(std::span<const LabeledImage>, std::span<const std::size_t>, \
                                   const Normalization&, std::mt19937_64*);                     \
  template class BatchStream<T>;

PERCPOOL_INSTANTIATE(float)
PERCPOOL_INSTANTIATE(double)

#undef PERCPOOL_INSTANTIATE

}  // namespace percpool
