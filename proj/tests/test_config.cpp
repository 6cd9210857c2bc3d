#include <gtest/gtest.h>

#include "percpool/config.hpp"
#include "percpool/errors.hpp"

using namespace percpool;

TEST(Config, DefaultsWhenEmpty) {
  auto c = parse_config("");
  EXPECT_EQ(c.model, ModelKind::TinySynth);
  EXPECT_EQ(c.pool.kind, PoolingKind::Perceptron);
  EXPECT_EQ(c.pool.init, PoolInit::Average);
  EXPECT_DOUBLE_EQ(c.pool.lr_factor, 0.1);
  EXPECT_DOUBLE_EQ(c.pool.wd_factor, 0.0);
  EXPECT_EQ(c.optim.kind, OptimizerKind::Adam);
}

TEST(Config, DottedKeysSectionsAndComments) {
  auto c = parse_config(R"(
# comment
model = model_c_like   # trailing comment
pooling = nn_16_1
schedule.epochs = 50, 100
[pool]
init = pattern
activation = relu
lr_factor = 0
[data]
dataset = cifar10
augment = yes
)");
  EXPECT_EQ(c.model, ModelKind::ModelCLike);
  EXPECT_EQ(c.pool.kind, PoolingKind::Nn161);
  EXPECT_EQ(c.optim.decay_epochs, (std::vector<std::size_t>{50, 100}));
  EXPECT_EQ(c.pool.init, PoolInit::Pattern);
  EXPECT_EQ(c.pool.activation, Activation::Relu);
  EXPECT_EQ(c.pool.lr_factor, 0.0);
  EXPECT_EQ(c.data.dataset, DatasetKind::Cifar10);
  EXPECT_TRUE(c.data.augment);
  EXPECT_EQ(c.num_classes(), 10);
  EXPECT_EQ(c.image_side(), 32u);
}

TEST(Config, UnknownKeyNamesLine) {
  try {
    parse_config("model = tiny_synth\npool.window = 3\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("pool.window"), std::string::npos);
  }
}

TEST(Config, BadValuesRejected) {
  EXPECT_THROW(parse_config("pooling = lp"), ConfigError);
  EXPECT_THROW(parse_config("lr = fast"), ConfigError);
  EXPECT_THROW(parse_config("epochs = -3"), ConfigError);
  EXPECT_THROW(parse_config("data.augment = maybe"), ConfigError);
  EXPECT_THROW(parse_config("just a line"), ConfigError);
  EXPECT_THROW(parse_config("[pool"), ConfigError);
}

TEST(Config, SerializeRoundTrips) {
  auto c = parse_config(R"(
model = model_a_like
pooling = nn_tensor
lr = 0.0123456789012345
weight_decay = 5e-5
schedule.epochs = 3,7
pool.use_bias = false
seed = 18446744073709551615
output.dir = some/where
)");
  const std::string text = serialize_config(c);
  auto back = parse_config(text);
  EXPECT_EQ(serialize_config(back), text);
  EXPECT_EQ(back.optim.lr, 0.0123456789012345);
  EXPECT_EQ(back.seed, 18446744073709551615ull);
  EXPECT_FALSE(back.pool.use_bias);
  EXPECT_EQ(back.output_dir, "some/where");
}
