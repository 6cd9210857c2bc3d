#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "percpool/checkpoint.hpp"
#include "percpool/errors.hpp"
#include "percpool/model.hpp"
#include "percpool/optim.hpp"
#include "percpool/trainer.hpp"

using namespace percpool;

namespace {

TrainConfig cifar_config(const std::string& model, const std::string& pooling, const std::string& extra = "") {
  return parse_config("model = " + model + "\npooling = " + pooling + "\ndata.dataset = cifar10\n" + extra);
}

std::filesystem::path temp_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace

struct AuditCase {
  const char* model;
  const char* pooling;
  const char* extra;
  std::size_t expected;
};

class PublishedAudit : public ::testing::TestWithParam<AuditCase> {};

TEST_P(PublishedAudit, PoolingTotal) {
  const auto p = GetParam();
  const Audit a = audit_params(cifar_config(p.model, p.pooling, p.extra));
  EXPECT_EQ(a.pooling_total, p.expected);
  EXPECT_EQ(a.model_total, a.optimizer_total);
}

INSTANTIATE_TEST_SUITE_P(
    Tables, PublishedAudit,
    ::testing::Values(AuditCase{"model_a_like", "perceptron", "", 10},
                      AuditCase{"model_a_like", "perceptron", "pool.use_bias = false", 8},
                      AuditCase{"model_a_like", "nn_4_1", "", 50},
                      AuditCase{"model_a_like", "nn_16_1", "", 194},
                      AuditCase{"model_a_like", "nn_field", "", 1600},
                      AuditCase{"model_a_like", "nn_tensor", "", 122880},
                      AuditCase{"model_a_like", "strided_conv", "", 82112},
                      AuditCase{"model_a_like", "nn_z", "", 960},
                      AuditCase{"model_a_like", "max", "", 0},
                      AuditCase{"model_c_like", "perceptron", "", 15},
                      AuditCase{"model_c_like", "nn_4_1", "", 75},
                      AuditCase{"model_c_like", "strided_conv", "", 344512}));

TEST(Model, SlotShapes) {
  auto m = build_model<float>(cifar_config("model_c_like", "nn_16_1"));
  ASSERT_EQ(m.slots.size(), 3u);
  EXPECT_EQ(m.slots[0].input, (Shape4{1, 64, 32, 32}));
  EXPECT_EQ(m.slots[2].output, (Shape4{1, 256, 4, 4}));
  Tensor<float> x(Shape4{2, 3, 32, 32}, 0.1f);
  EXPECT_EQ(m.net.forward(x, Mode::Eval).shape(), (Shape4{2, 10, 1, 1}));
}

TEST(Model, BackboneInitIndependentOfPooling) {
  auto a = build_model<float>(cifar_config("model_c_like", "average"));
  auto b = build_model<float>(cifar_config("model_c_like", "perceptron"));
  auto sa = a.net.state(), sb = b.net.state();
  // conv weights of block 0 and the dense head
  EXPECT_EQ(sa[0].tensor->data()[5], sb[0].tensor->data()[5]);
  const auto& da = *sa[sa.size() - 2].tensor;
  const auto& db = *sb[sb.size() - 2].tensor;
  ASSERT_EQ(da.shape(), db.shape());
  for (std::size_t i = 0; i < da.size(); i += 97) EXPECT_EQ(da[i], db[i]);
}

TEST(Model, UpsampleRejectedForClassifiers) {
  EXPECT_THROW(build_model<float>(parse_config("upsample = nn_up4")), ConfigError);
}

TEST(Model, ImageSideMustSuitPoolingDepth) {
  EXPECT_THROW(build_model<float>(parse_config("model = model_c_like\ndata.synth_size = 12")), ConfigError);
}

TEST(Model, StridedConvSlotCanDropRelu) {
  auto with = audit_params(cifar_config("model_a_like", "strided_conv"));
  auto without = audit_params(cifar_config("model_a_like", "strided_conv", "pool.strided_conv_relu = false"));
  EXPECT_EQ(with.pooling_total, without.pooling_total);
}

TEST(Checkpoint, RoundTripPreservesAccuracy) {
  const auto dir = temp_dir("percpool_ckpt_rt");
  auto config = parse_config("model = tiny_synth\npooling = nn_4_1\npool.init = pattern\nseed = 4\n");
  auto model = build_model<float>(config);
  auto data = load_datasets(config);
  const double acc = evaluate(model, data.val, data.norm);
  write_checkpoint(dir / "c.bin", make_checkpoint(config, model));
  auto ck = read_checkpoint(dir / "c.bin");
  EXPECT_EQ(ck.config_text, serialize_config(config));
  auto restored = restore_model<float>(ck);
  EXPECT_EQ(evaluate(restored, data.val, data.norm), acc);
  auto s1 = model.net.state(), s2 = restored.net.state();
  ASSERT_EQ(s1.size(), s2.size());
  for (std::size_t i = 0; i < s1.size(); ++i) {
    EXPECT_EQ(s1[i].name, s2[i].name);
    for (std::size_t k = 0; k < s1[i].tensor->size(); ++k) ASSERT_EQ((*s1[i].tensor)[k], (*s2[i].tensor)[k]);
  }
  std::filesystem::remove_all(dir);
}

TEST(Checkpoint, RejectsBadMagicVersionAndTruncation) {
  const auto dir = temp_dir("percpool_ckpt_bad");
  auto config = parse_config("");
  auto model = build_model<float>(config);
  write_checkpoint(dir / "c.bin", make_checkpoint(config, model));
  std::ifstream in(dir / "c.bin", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto write = [&](const std::string& b) {
    std::ofstream o(dir / "x.bin", std::ios::binary);
    o << b;
  };
  std::string bad = bytes;
  bad[0] = 'X';
  write(bad);
  EXPECT_THROW(read_checkpoint(dir / "x.bin"), DataError);
  bad = bytes;
  bad[8] = 9;
  write(bad);
  EXPECT_THROW(read_checkpoint(dir / "x.bin"), DataError);
  write(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(read_checkpoint(dir / "x.bin"), DataError);
  write(bytes + "z");
  EXPECT_THROW(read_checkpoint(dir / "x.bin"), DataError);
  std::filesystem::remove_all(dir);
}

TEST(Checkpoint, MismatchedTensorRejected) {
  auto config = parse_config("");
  auto model = build_model<float>(config);
  auto ck = make_checkpoint(config, model);
  ck.tensors[0].second = Tensor<float>(Shape4{1, 1, 1, 1});
  EXPECT_THROW(restore_model<float>(ck), DataError);
  ck = make_checkpoint(config, model);
  ck.tensors.pop_back();
  EXPECT_THROW(restore_model<float>(ck), DataError);
}

TEST(Evaluate, EmptyDatasetThrows) {
  auto model = build_model<float>(parse_config(""));
  std::vector<LabeledImage> none;
  EXPECT_THROW(evaluate(model, none, cifar10_normalization()), DataError);
}

TEST(Evaluate, ClassCountMismatchThrows) {
  auto model = build_model<float>(parse_config("data.classes = 4"));
  auto data = synth_dataset(20, 8, 1);
  EXPECT_THROW(evaluate(model, data, cifar10_normalization()), ConfigError);
}

TEST(Evaluate, RandomWeightsGiveChanceAccuracy) {
  auto config = parse_config("data.classes = 10\nseed = 77\n");
  auto model = build_model<float>(config);
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<float> u(-0.5f, 0.5f);
  for (auto* p : model.net.parameters())
    for (auto& v : p->value.data()) v = u(rng);
  auto data = synth_dataset(10000, 10, 5);
  const double acc = evaluate(model, data, cifar10_normalization(), 500);
  EXPECT_NEAR(acc, 0.1, 0.02);
}
