#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "percpool/config.hpp"
#include "percpool/data.hpp"
#include "percpool/model.hpp"

namespace percpool {

inline constexpr const char* kDataRootEnv = "PERCPOOL_DATA_ROOT";
inline constexpr const char* kMetricsHeader = "epoch,train_loss,train_acc,val_acc,lr,wall_seconds";

struct MetricsRow {
  std::size_t epoch = 0;  ///< 1-based
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
  double lr = 0.0;
  double wall_seconds = 0.0;
};

std::string format_metrics_row(const MetricsRow& row);

struct Datasets {
  std::vector<LabeledImage> train;
  std::vector<LabeledImage> val;
  Normalization norm;
  int classes = 0;
};

/// CIFAR-10 root: $PERCPOOL_DATA_ROOT if set and non-empty, else data.root.
std::filesystem::path resolve_data_root(const TrainConfig& config);

/// First `per_class` examples of every class, in file order.
std::vector<LabeledImage> balanced_subset(std::span<const LabeledImage> data, std::size_t per_class,
                                          int classes);

/// Synthetic sets are generated from the config seed; CIFAR-10 is read from
/// the resolved root (train split / test split) and optionally subsetted.
Datasets load_datasets(const TrainConfig& config);

/// Top-1 accuracy in eval mode. Throws DataError on an empty set and
/// ConfigError when a label does not fit the model's class count.
template <typename T>
double evaluate(Model<T>& model, std::span<const LabeledImage> data, const Normalization& norm,
                std::size_t batch_size = 100);

struct TrainOptions {
  std::ostream* log = nullptr;
};

struct TrainResult {
  std::vector<MetricsRow> rows;
  std::filesystem::path metrics_path;
  std::filesystem::path final_checkpoint;
  std::vector<std::filesystem::path> decay_checkpoints;
};

/// Trains in f32 following the configured schedule. Writes
/// <output.dir>/metrics.csv (config echoed as `#` lines, then one CSV row per
/// epoch), a checkpoint before every LR decay and checkpoint_final.bin.
/// A non-finite activation or loss aborts with NumericError.
TrainResult train(const TrainConfig& config, const Datasets& data, const TrainOptions& options = {});
TrainResult train(const TrainConfig& config, const TrainOptions& options = {});

/// Repeats training with seeds seed, seed+1, ... into <output.dir>/run<i>.
std::vector<TrainResult> train_runs(const TrainConfig& config, std::size_t runs,
                                    const TrainOptions& options = {});

}  // namespace percpool
