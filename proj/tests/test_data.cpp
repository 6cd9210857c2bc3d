#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "percpool/data.hpp"
#include "percpool/errors.hpp"

using namespace percpool;

namespace {

std::vector<std::uint8_t> record(std::uint8_t label, std::uint8_t base) {
  std::vector<std::uint8_t> r(kCifarRecordBytes);
  r[0] = label;
  for (std::size_t i = 1; i < r.size(); ++i) r[i] = static_cast<std::uint8_t>(base + i * 7);
  return r;
}

LabeledImage gradient_image(int label) {
  LabeledImage img;
  img.label = label;
  img.pixels.resize(3 * 32 * 32);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(1 + i % 250);
  return img;
}

}  // namespace

TEST(Cifar10, ParsesRecordsIntoPlanes) {
  auto a = record(3, 0), b = record(9, 5);
  std::vector<std::uint8_t> bytes(a);
  bytes.insert(bytes.end(), b.begin(), b.end());
  auto imgs = parse_cifar10(bytes);
  ASSERT_EQ(imgs.size(), 2u);
  EXPECT_EQ(imgs[0].label, 3);
  EXPECT_EQ(imgs[1].label, 9);
  // green plane starts at byte 1 + 1024; (c=1, y=2, x=5)
  EXPECT_EQ(imgs[0].at(1, 2, 5), a[1 + 1024 + 2 * 32 + 5]);
  EXPECT_EQ(imgs[1].at(2, 31, 31), b[3072]);
}

TEST(Cifar10, TruncatedFileThrows) {
  std::vector<std::uint8_t> bytes(3072);
  EXPECT_THROW(parse_cifar10(bytes), DataError);
}

TEST(Cifar10, LabelAboveNineThrows) {
  auto r = record(10, 0);
  EXPECT_THROW(parse_cifar10(r), DataError);
}

TEST(Cifar10, WriteThenLoadRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "percpool_cifar_rt";
  std::filesystem::create_directories(dir);
  std::vector<LabeledImage> imgs{gradient_image(1), gradient_image(7)};
  imgs[1].pixels[100] = 0;
  write_cifar10(dir / "test_batch.bin", imgs);
  EXPECT_EQ(std::filesystem::file_size(dir / "test_batch.bin"), 2 * kCifarRecordBytes);
  auto back = load_cifar10_split(dir, Split::Test);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].label, 7);
  EXPECT_EQ(back[1].pixels, imgs[1].pixels);
  EXPECT_EQ(find_cifar10_dir(dir), dir);
  EXPECT_THROW(load_cifar10_split(dir, Split::Train), DataError);
  std::filesystem::remove_all(dir);
}

TEST(Normalize, StatedConstants) {
  LabeledImage img;
  img.height = img.width = 1;
  img.pixels = {0, 255, 0};
  auto n = cifar10_normalization();
  EXPECT_DOUBLE_EQ(n.mean[0], 122.782);
  auto t = normalize<double>(img, n);
  EXPECT_NEAR(t[0], -122.782 / 256.0, 1e-15);
  EXPECT_NEAR(t[1], (255 - 117.001) / 256.0, 1e-12);
  EXPECT_NEAR(t[1], 0.53906, 1e-5);
  EXPECT_NEAR(t[2], -0.40741, 1e-5);
  // the red mean itself maps to zero
  EXPECT_EQ((122.782 - n.mean[0]) / n.scale, 0.0);
}

TEST(Normalize, DenormalizeRoundTripsBytes) {
  auto img = gradient_image(0);
  img.pixels[0] = 0;
  img.pixels[1] = 255;
  auto n = cifar10_normalization();
  EXPECT_EQ(denormalize(normalize<float>(img, n), n), img.pixels);
  EXPECT_EQ(denormalize(normalize<double>(img, n), n), img.pixels);
}

TEST(Augment, CenterCropIsIdentity) {
  auto img = gradient_image(4);
  auto c = crop_padded(img, 4, 4);
  EXPECT_EQ(c.pixels, img.pixels);
  EXPECT_EQ(c.label, 4);
}

TEST(Augment, TopLeftCropHasZeroBand) {
  auto img = gradient_image(2);
  auto c = crop_padded(img, 0, 0);
  for (std::size_t ch = 0; ch < 3; ++ch) {
    for (std::size_t i = 0; i < 32; ++i) {
      for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_EQ(c.at(ch, k, i), 0);
        EXPECT_EQ(c.at(ch, i, k), 0);
      }
    }
    EXPECT_EQ(c.at(ch, 4, 4), img.at(ch, 0, 0));
    EXPECT_EQ(c.at(ch, 31, 31), img.at(ch, 27, 27));
  }
}

TEST(Augment, RandomCropsNeverAddMass) {
  auto img = gradient_image(5);
  long orig = 0;
  for (auto v : img.pixels) orig += v;
  std::mt19937_64 rng(3);
  for (int t = 0; t < 1000; ++t) {
    auto c = augment_crop(img, rng);
    ASSERT_EQ(c.pixels.size(), img.pixels.size());
    ASSERT_EQ(c.label, img.label);
    long s = 0;
    for (auto v : c.pixels) s += v;
    ASSERT_LE(s, orig);
  }
}

TEST(Batching, BalancedBatchesHaveUniformHistogram) {
  std::vector<int> labels;
  for (int k = 0; k < 10; ++k)
    for (int i = 0; i < 23 + k; ++i) labels.push_back(k);
  BatchSpec spec{50, true, 4, 10};
  auto plan = plan_epoch(labels, spec, 0);
  EXPECT_EQ(plan.size(), 4u);  // 23 per class smallest -> 4 batches of 5 per class
  std::set<std::size_t> seen;
  for (const auto& b : plan) {
    ASSERT_EQ(b.size(), 50u);
    std::map<int, int> hist;
    for (auto i : b) {
      hist[labels[i]]++;
      EXPECT_TRUE(seen.insert(i).second) << "index visited twice";
    }
    for (int k = 0; k < 10; ++k) EXPECT_EQ(hist[k], 5);
  }
}

TEST(Batching, UnbalancedDropsRemainder) {
  std::vector<int> labels(100, 0);
  BatchSpec spec{32, false, 1, 10};
  auto plan = plan_epoch(labels, spec, 0);
  EXPECT_EQ(plan.size(), 3u);
  std::set<std::size_t> seen;
  for (const auto& b : plan)
    for (auto i : b) EXPECT_TRUE(seen.insert(i).second);
}

TEST(Batching, DeterministicInSeedAndEpoch) {
  std::vector<int> labels;
  for (int i = 0; i < 200; ++i) labels.push_back(i % 10);
  BatchSpec spec{20, true, 99, 10};
  EXPECT_EQ(plan_epoch(labels, spec, 3), plan_epoch(labels, spec, 3));
  EXPECT_NE(plan_epoch(labels, spec, 3), plan_epoch(labels, spec, 4));
  spec.seed = 100;
  auto other = plan_epoch(labels, spec, 3);
  spec.seed = 99;
  EXPECT_NE(other, plan_epoch(labels, spec, 3));
}

TEST(Batching, SpecValidation) {
  EXPECT_THROW((BatchSpec{0, true, 0, 10}).validate(), ConfigError);
  EXPECT_THROW((BatchSpec{25, true, 0, 10}).validate(), ConfigError);
  EXPECT_NO_THROW((BatchSpec{25, false, 0, 10}).validate());
}

TEST(Batching, StreamAssemblesNormalizedTensors) {
  auto data = synth_dataset(40, 4, 1);
  BatchStream<float> stream(data, BatchSpec{8, true, 2, 4}, 0, cifar10_normalization(), false);
  EXPECT_EQ(stream.size(), 5u);
  std::size_t n = 0;
  while (auto b = stream.next()) {
    EXPECT_EQ(b->images.shape(), (Shape4{8, 3, 16, 16}));
    EXPECT_EQ(b->labels.size(), 8u);
    ++n;
  }
  EXPECT_EQ(n, 5u);
}

TEST(Synth, TwoClassBlobsSitInOppositeCorners) {
  auto data = synth_dataset(200, 2, 5);
  ASSERT_EQ(data.size(), 200u);
  double tl[2] = {0, 0}, br[2] = {0, 0};
  for (const auto& img : data) {
    for (std::size_t y = 0; y < 4; ++y)
      for (std::size_t x = 0; x < 4; ++x) {
        tl[img.label] += img.at(0, y, x);
        br[img.label] += img.at(0, 12 + y, 12 + x);
      }
  }
  EXPECT_GT(tl[0], 2 * br[0]);
  EXPECT_GT(br[1], 2 * tl[1]);
}

TEST(Synth, SameSeedSameData) {
  auto a = synth_dataset(50, 3, 11), b = synth_dataset(50, 3, 11), c = synth_dataset(50, 3, 12);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].pixels, b[i].pixels);
  bool differ = false;
  for (std::size_t i = 0; i < a.size(); ++i) differ |= a[i].pixels != c[i].pixels;
  EXPECT_TRUE(differ);
}

namespace {

std::vector<double> pooled_features(const LabeledImage& img) {
  const std::size_t cell = img.height / 4;
  std::vector<double> f(3 * 16, 0.0);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < img.height; ++y)
      for (std::size_t x = 0; x < img.width; ++x) f[c * 16 + (y / cell) * 4 + x / cell] += img.at(c, y, x);
  return f;
}

double nearest_centroid_accuracy(int classes, std::uint64_t seed) {
  auto train = synth_dataset(1000, classes, seed);
  auto val = synth_dataset(1000, classes, seed + 1);
  std::vector<std::vector<double>> centroid(classes, std::vector<double>(48, 0.0));
  std::vector<int> count(classes, 0);
  for (const auto& img : train) {
    auto f = pooled_features(img);
    for (std::size_t i = 0; i < 48; ++i) centroid[img.label][i] += f[i];
    count[img.label]++;
  }
  for (int k = 0; k < classes; ++k)
    for (auto& v : centroid[k]) v /= count[k];
  int correct = 0;
  for (const auto& img : val) {
    auto f = pooled_features(img);
    int best = 0;
    double best_d = 1e300;
    for (int k = 0; k < classes; ++k) {
      double d = 0;
      for (std::size_t i = 0; i < 48; ++i) d += (f[i] - centroid[k][i]) * (f[i] - centroid[k][i]);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    correct += best == img.label;
  }
  return correct / static_cast<double>(val.size());
}

}  // namespace

TEST(Synth, NearestCentroidOnPooledFeaturesSeparates) {
  for (int classes : {2, 4, 10, 16}) {
    EXPECT_GE(nearest_centroid_accuracy(classes, 21), 0.95) << classes << " classes";
  }
}

TEST(Synth, TooManyClassesRejected) { EXPECT_THROW(synth_dataset(10, 17, 1), ConfigError); }
