#include "percpool/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "percpool/checkpoint.hpp"
#include "percpool/errors.hpp"
#include "percpool/loss.hpp"
#include "percpool/optim.hpp"

namespace percpool {

std::string format_metrics_row(const MetricsRow& r) {
  char buf[192];
  std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f,%.6f,%.6g,%.3f", r.epoch, r.train_loss, r.train_acc,
                r.val_acc, r.lr, r.wall_seconds);
  return buf;
}

std::filesystem::path resolve_data_root(const TrainConfig& config) {
  if (const char* env = std::getenv(kDataRootEnv); env != nullptr && *env != '\0') return env;
  return config.data.root;
}

std::vector<LabeledImage> balanced_subset(std::span<const LabeledImage> data, std::size_t per_class,
                                          int classes) {
  std::vector<std::size_t> taken(static_cast<std::size_t>(classes), 0);
  std::vector<LabeledImage> out;
  for (const auto& img : data) {
    if (img.label < 0 || img.label >= classes) continue;
    auto& n = taken[static_cast<std::size_t>(img.label)];
    if (n < per_class) {
      out.push_back(img);
      ++n;
    }
  }
  for (std::size_t k = 0; k < taken.size(); ++k) {
    if (taken[k] < per_class) {
      throw DataError("class " + std::to_string(k) + " has only " + std::to_string(taken[k]) +
                      " examples, " + std::to_string(per_class) + " requested");
    }
  }
  return out;
}

Datasets load_datasets(const TrainConfig& config) {
  Datasets d;
  d.classes = config.num_classes();
  d.norm = cifar10_normalization();
  if (config.data.dataset == DatasetKind::Synth) {
    d.train = synth_dataset(config.data.synth_train, d.classes, config.seed, config.data.synth_size);
    d.val = synth_dataset(config.data.synth_val, d.classes, config.seed + 7919, config.data.synth_size);
  } else {
    const auto root = resolve_data_root(config);
    if (root.empty()) {
      throw DataError(std::string("no CIFAR-10 root: set data.root or ") + kDataRootEnv);
    }
    const auto dir = find_cifar10_dir(root);
    if (!dir) throw DataError("no CIFAR-10 binary batches under " + root.string());
    d.train = load_cifar10_split(*dir, Split::Train);
    d.val = load_cifar10_split(*dir, Split::Test);
  }
  const auto k = static_cast<std::size_t>(d.classes);
  if (config.data.train_size) {
    if (config.data.train_size % k) throw ConfigError("data.train_size must be a multiple of the class count");
    d.train = balanced_subset(d.train, config.data.train_size / k, d.classes);
  }
  if (config.data.val_size) {
    if (config.data.val_size % k) throw ConfigError("data.val_size must be a multiple of the class count");
    d.val = balanced_subset(d.val, config.data.val_size / k, d.classes);
  }
  return d;
}

template <typename T>
double evaluate(Model<T>& model, std::span<const LabeledImage> data, const Normalization& norm,
                std::size_t batch_size) {
  if (data.empty()) throw DataError("cannot evaluate on an empty dataset");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  for (const auto& img : data) {
    if (img.label < 0 || img.label >= model.classes) {
      throw ConfigError("dataset label " + std::to_string(img.label) + " does not fit a " +
                        std::to_string(model.classes) + "-class model");
    }
  }
  std::size_t correct = 0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    const std::size_t end = std::min(data.size(), start + batch_size);
    idx.resize(end - start);
    for (std::size_t i = start; i < end; ++i) idx[i - start] = i;
    Batch<T> batch = assemble_batch<T>(data, idx, norm);
    const auto pred = argmax_classes(model.net.forward(batch.images, Mode::Eval));
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == batch.labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

namespace {

std::unique_ptr<Optimizer<float>> make_optimizer(const OptimSettings& s) {
  if (s.kind == OptimizerKind::Sgd) return std::make_unique<Sgd<float>>(SgdOptions{s.momentum, s.weight_decay});
  return std::make_unique<Adam<float>>(AdamOptions{s.beta1, s.beta2, s.eps, s.weight_decay});
}

}  // namespace

TrainResult train(const TrainConfig& config, const Datasets& data, const TrainOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  Schedule schedule{config.optim.lr, config.optim.decay_factor, config.optim.decay_epochs};
  schedule.validate();
  if (config.epochs == 0) throw ConfigError("epochs must be positive");
  if (data.train.empty()) throw DataError("training set is empty");

  Model<float> model = build_model<float>(config);
  auto opt = make_optimizer(config.optim);
  opt->add(model.net.parameters());

  BatchSpec spec;
  spec.batch_size = config.data.batch_size;
  spec.balanced = config.data.balanced;
  spec.seed = config.seed;
  spec.classes = static_cast<std::size_t>(data.classes);
  spec.validate();

  const std::filesystem::path out_dir = config.output_dir;
  std::filesystem::create_directories(out_dir);
  TrainResult result;
  result.metrics_path = out_dir / "metrics.csv";
  {
    std::ofstream m(result.metrics_path, std::ios::trunc);
    if (!m) throw DataError("cannot write " + result.metrics_path.string());
    std::istringstream cfg(serialize_config(config));
    for (std::string line; std::getline(cfg, line);) m << "# " << line << "\n";
    m << kMetricsHeader << "\n";
  }

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (epoch > 0 && schedule.decays_at(epoch)) {
      auto path = out_dir / ("checkpoint_epoch" + std::to_string(epoch) + ".bin");
      write_checkpoint(path, make_checkpoint(config, model));
      result.decay_checkpoints.push_back(path);
    }
    const double lr = schedule_lr(schedule, epoch);
    BatchStream<float> stream(data.train, spec, epoch, data.norm, config.data.augment);
    if (stream.size() == 0) throw DataError("training set yields no complete batch");

    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t seen = 0;
    std::size_t b = 0;
    while (auto batch = stream.next()) {
      model.net.zero_grad();
      Tensor<float> logits;
      try {
        logits = model.net.forward_checked(batch->images, Mode::Train);
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch + 1) + " batch " + std::to_string(b) + ": " +
                           e.what());
      }
      auto res = softmax_xent(logits, batch->labels);
      if (!std::isfinite(res.loss)) {
        throw NumericError("epoch " + std::to_string(epoch + 1) + " batch " + std::to_string(b) +
                           ": non-finite loss");
      }
      model.net.backward(res.grad);
      opt->step(lr);

      const auto pred = argmax_classes(logits);
      for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == batch->labels[i];
      loss_sum += res.loss * static_cast<double>(pred.size());
      seen += pred.size();
      ++b;
    }

    MetricsRow row;
    row.epoch = epoch + 1;
    row.train_loss = loss_sum / static_cast<double>(seen);
    row.train_acc = static_cast<double>(correct) / static_cast<double>(seen);
    row.val_acc = data.val.empty() ? 0.0 : evaluate(model, data.val, data.norm);
    row.lr = lr;
    if (config.record_wall_time) {
      row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    result.rows.push_back(row);
    {
      std::ofstream m(result.metrics_path, std::ios::app);
      m << format_metrics_row(row) << "\n";
    }
    if (options.log) *options.log << format_metrics_row(row) << std::endl;
  }

  result.final_checkpoint = out_dir / "checkpoint_final.bin";
  write_checkpoint(result.final_checkpoint, make_checkpoint(config, model));
  return result;
}

TrainResult train(const TrainConfig& config, const TrainOptions& options) {
  return train(config, load_datasets(config), options);
}

std::vector<TrainResult> train_runs(const TrainConfig& config, std::size_t runs, const TrainOptions& options) {
  if (runs == 0) throw ConfigError("runs must be positive");
  std::vector<TrainResult> out;
  for (std::size_t r = 0; r < runs; ++r) {
    TrainConfig c = config;
    c.seed = config.seed + r;
    c.output_dir = (std::filesystem::path(config.output_dir) / ("run" + std::to_string(r))).string();
    if (options.log) *options.log << "# run " << r << " seed " << c.seed << std::endl;
    out.push_back(train(c, options));
  }
  return out;
}

template double evaluate<float>(Model<float>&, std::span<const LabeledImage>, const Normalization&, std::size_t);
template double evaluate<double>(Model<double>&, std::span<const LabeledImage>, const Normalization&,
                                 std::size_t);

}  // namespace percpool
