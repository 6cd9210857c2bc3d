#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "percpool/init.hpp"
#include "percpool/perceptron_pool.hpp"

namespace percpool {

enum class ModelKind { ModelALike, ModelCLike, TinySynth };
enum class PoolingKind { Max, Average, StridedConv, Perceptron, Nn41, Nn161, NnZ, NnField, NnTensor };
enum class OptimizerKind { Sgd, Adam };
enum class DatasetKind { Synth, Cifar10 };

const char* to_string(ModelKind k);
const char* to_string(PoolingKind k);
const char* to_string(OptimizerKind k);
const char* to_string(DatasetKind k);
PoolingKind parse_pooling(const std::string& s);

/// True for the presets built from perceptron-pool layers.
bool is_perceptron_pooling(PoolingKind k);

struct PoolSettings {
  PoolingKind kind = PoolingKind::Perceptron;
  PoolInit init = PoolInit::Average;
  Activation activation = Activation::Identity;         ///< output perceptron
  Activation hidden_activation = Activation::Identity;  ///< hidden layer of nn_4_1 / nn_16_1
  bool use_bias = true;
  double lr_factor = 0.1;
  double wd_factor = 0.0;
  bool strided_conv_relu = true;
};

struct OptimSettings {
  OptimizerKind kind = OptimizerKind::Adam;
  double lr = 1e-3;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 5e-5;
  std::vector<std::size_t> decay_epochs;
  double decay_factor = 0.1;
};

struct DataSettings {
  DatasetKind dataset = DatasetKind::Synth;
  std::string root;            ///< CIFAR-10 directory; PERCPOOL_DATA_ROOT overrides
  std::size_t train_size = 0;  ///< 0 = everything; otherwise a class-balanced subset
  std::size_t val_size = 0;
  bool augment = false;
  bool balanced = true;
  std::size_t batch_size = 50;
  int classes = 4;             ///< synthetic data only; CIFAR-10 is always 10
  std::size_t synth_train = 1000;
  std::size_t synth_val = 400;
  std::size_t synth_size = 16;
};

struct TrainConfig {
  ModelKind model = ModelKind::TinySynth;
  PoolSettings pool;
  std::string upsample = "none";
  OptimSettings optim;
  DataSettings data;
  double bn_eps = 1e-5;
  double bn_momentum = 0.1;
  std::size_t epochs = 20;
  std::uint64_t seed = 1;
  std::string output_dir = "runs/default";
  bool record_wall_time = true;

  int num_classes() const { return data.dataset == DatasetKind::Cifar10 ? 10 : data.classes; }
  std::size_t image_side() const { return data.dataset == DatasetKind::Cifar10 ? 32 : data.synth_size; }
};

/// Parses `key = value` lines. Keys are dotted (`pool.init`); a `[section]`
/// line prefixes the keys that follow. `#` starts a comment. Unknown keys and
/// malformed values throw ConfigError with the line number.
TrainConfig parse_config(std::string_view text);
TrainConfig load_config(const std::filesystem::path& file);

/// Every key with its current value, one per line, in a form parse_config accepts.
std::string serialize_config(const TrainConfig& config);

}  // namespace percpool
