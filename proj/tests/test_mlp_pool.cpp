#include <gtest/gtest.h>

#include "percpool/errors.hpp"
#include "percpool/mlp_pool.hpp"
#include "test_util.hpp"

using namespace percpool;
using percpool::testing::fill_random;
using percpool::testing::random_tensor;

TEST(MlpPool, Nn41ShapeChain) {
  MlpPoolStack<float> s(nn_4_1(PerceptronPoolConfig{}));
  auto chain = s.shape_chain(Shape4{1, 3, 32, 32});
  ASSERT_EQ(chain.size(), 3u);
  EXPECT_EQ(chain[1].height, 32u);
  EXPECT_EQ(chain[2], (Shape4{1, 3, 16, 16}));
}

TEST(MlpPool, Nn161ShapeChain) {
  MlpPoolStack<float> s(nn_16_1(PerceptronPoolConfig{}));
  auto chain = s.shape_chain(Shape4{1, 3, 32, 32});
  EXPECT_EQ(chain[1], (Shape4{1, 3, 64, 64}));
  EXPECT_EQ(chain[2], (Shape4{1, 3, 16, 16}));
}

TEST(MlpPool, BrokenChainReportsLayer) {
  PerceptronPoolConfig a;
  PerceptronPoolConfig b;
  b.window_h = b.window_w = b.stride = 3;
  MlpPoolStack<float> s({a, b});
  try {
    s.bind(Shape4{1, 1, 8, 8});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("layer 1"), std::string::npos) << e.what();
  }
}

TEST(MlpPool, ParamCounts) {
  PerceptronPoolConfig c;
  EXPECT_EQ(param_count(nn_4_1(c)), 25u);
  EXPECT_EQ(param_count(nn_16_1(c)), 97u);
  c.use_bias = false;
  EXPECT_EQ(param_count(nn_4_1(c)), 20u);
}

TEST(MlpPool, IdentityStackIsLinearInInput) {
  std::mt19937_64 rng(2);
  PerceptronPoolConfig c;
  c.use_bias = false;
  MlpPoolStack<double> s(nn_16_1(c));
  const Shape4 in{1, 2, 8, 8};
  s.bind(in);
  for (std::size_t l = 0; l < s.depth(); ++l) fill_random(s.layer(l).weight().value.data(), rng);
  auto x = random_tensor<double>(in, rng);
  auto y1 = s.forward(x, Mode::Train);
  for (auto& v : x.data()) v *= 3.0;
  auto y3 = s.forward(x, Mode::Train);
  for (std::size_t i = 0; i < y1.size(); ++i) EXPECT_NEAR(y3[i], 3.0 * y1[i], 1e-12);
}

TEST(MlpPool, StateNamesPerLayer) {
  MlpPoolStack<float> s(nn_4_1(PerceptronPoolConfig{}));
  s.bind(Shape4{1, 1, 4, 4});
  auto st = s.state("p");
  ASSERT_EQ(st.size(), 4u);
  EXPECT_EQ(st[0].name, "p.layer0.weight");
  EXPECT_EQ(st[3].name, "p.layer1.bias");
}

TEST(GapReplacement, CoversWholeMapWithSmallLearningRate) {
  auto c = gap_replacement(8);
  EXPECT_EQ(c.window_h, 8u);
  EXPECT_EQ(c.stride, 8u);
  EXPECT_DOUBLE_EQ(c.lr_factor, 1e-3);
  PerceptronPool<float> p(c);
  EXPECT_EQ(p.bind(Shape4{1, 10, 8, 8}), (Shape4{1, 10, 1, 1}));
}
