#include "percpool/layer_spec.hpp"

#include "percpool/activation.hpp"
#include "percpool/batchnorm.hpp"
#include "percpool/conv2d.hpp"
#include "percpool/dense.hpp"
#include "percpool/errors.hpp"
#include "percpool/fixed_pool.hpp"
#include "percpool/mlp_pool.hpp"

namespace percpool {

const std::vector<std::string>& layer_spec_names() {
  static const std::vector<std::string> names = {
      "conv2d",       "dense",          "batchnorm",         "relu",          "maxpool",
      "avgpool",      "strided_conv",   "perceptron",        "perceptron_relu", "perceptron_nobias",
      "perceptron_p4", "perceptron_z",  "perceptron_field",  "perceptron_tensor", "nn_4_1",
      "nn_16_1",      "upsample4",      "upsample16",        "gap"};
  return names;
}

template <typename T>
LayerSpec<T> make_layer_spec(const std::string& name) {
  const Shape4 pool_in{2, 3, 4, 4};
  PerceptronPoolConfig pc;
  auto pool = [&](PerceptronPoolConfig c) {
    return LayerSpec<T>{std::make_unique<PerceptronPool<T>>(c), pool_in};
  };
  auto upsample = [&](std::size_t factor) {
    PerceptronUpsampleConfig uc;
    uc.factor = factor;
    return LayerSpec<T>{std::make_unique<PerceptronUpsample<T>>(uc), Shape4{2, 2, 3, 3}};
  };

  if (name == "conv2d") return {std::make_unique<Conv2d<T>>(Conv2dConfig{2, 3, 3, 3, 1, 1}), Shape4{2, 2, 5, 5}};
  if (name == "dense") return {std::make_unique<Dense<T>>(18, 4), Shape4{2, 2, 3, 3}};
  if (name == "batchnorm") return {std::make_unique<BatchNorm2d<T>>(3), Shape4{4, 3, 3, 3}};
  if (name == "relu") return {std::make_unique<Relu<T>>(), pool_in};
  if (name == "maxpool") return {std::make_unique<FixedPool<T>>(PoolMode::Max, 2, 2, 2), pool_in};
  if (name == "avgpool") return {std::make_unique<FixedPool<T>>(PoolMode::Average, 2, 2, 2), pool_in};
  if (name == "strided_conv") {
    auto seq = std::make_unique<Sequential<T>>("strided_conv");
    seq->add(std::make_unique<Conv2d<T>>(Conv2dConfig{3, 3, 2, 2, 2, 0}));
    seq->add(std::make_unique<Relu<T>>());
    return {std::move(seq), pool_in};
  }
  if (name == "perceptron") return pool(pc);
  if (name == "perceptron_relu") {
    pc.activation = Activation::Relu;
    return pool(pc);
  }
  if (name == "perceptron_nobias") {
    pc.use_bias = false;
    return pool(pc);
  }
  if (name == "perceptron_p4") {
    pc.units = 4;
    return pool(pc);
  }
  if (name == "perceptron_z") {
    pc.sharing = SharingMode::PerChannel;
    return pool(pc);
  }
  if (name == "perceptron_field") {
    pc.sharing = SharingMode::PerField;
    return pool(pc);
  }
  if (name == "perceptron_tensor") {
    pc.sharing = SharingMode::PerTensor;
    return pool(pc);
  }
  if (name == "nn_4_1") return {std::make_unique<MlpPoolStack<T>>(nn_4_1(pc)), Shape4{2, 2, 8, 8}};
  if (name == "nn_16_1") return {std::make_unique<MlpPoolStack<T>>(nn_16_1(pc)), Shape4{2, 2, 8, 8}};
  if (name == "upsample4") return upsample(2);
  if (name == "upsample16") return upsample(4);
  if (name == "gap") return {std::make_unique<PerceptronPool<T>>(gap_replacement(4)), pool_in};
  throw ConfigError("unknown layer spec '" + name + "'");
}

template <typename T>
std::unique_ptr<Layer<T>> make_bench_pool(const std::string& name) {
  PerceptronPoolConfig pc;
  if (name == "max") return std::make_unique<FixedPool<T>>(PoolMode::Max, 2, 2, 2);
  if (name == "average") return std::make_unique<FixedPool<T>>(PoolMode::Average, 2, 2, 2);
  if (name == "perceptron") return std::make_unique<PerceptronPool<T>>(pc);
  if (name == "perceptron_p4") {
    pc.units = 4;
    return std::make_unique<PerceptronPool<T>>(pc);
  }
  if (name == "nn_4_1") return std::make_unique<MlpPoolStack<T>>(nn_4_1(pc));
  if (name == "nn_16_1") return std::make_unique<MlpPoolStack<T>>(nn_16_1(pc));
  if (name == "nn_tensor") {
    pc.sharing = SharingMode::PerTensor;
    return std::make_unique<PerceptronPool<T>>(pc);
  }
  throw ConfigError("unknown pooling operator '" + name + "'");
}

template LayerSpec<float> make_layer_spec<float>(const std::string&);
template LayerSpec<double> make_layer_spec<double>(const std::string&);
template std::unique_ptr<Layer<float>> make_bench_pool<float>(const std::string&);
template std::unique_ptr<Layer<double>> make_bench_pool<double>(const std::string&);

}  // namespace percpool
