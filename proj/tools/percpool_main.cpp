#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "percpool/checkpoint.hpp"
#include "percpool/complexity.hpp"
#include "percpool/errors.hpp"
#include "percpool/gradcheck.hpp"
#include "percpool/layer_spec.hpp"
#include "percpool/model.hpp"
#include "percpool/trainer.hpp"

namespace fs = std::filesystem;
using namespace percpool;

namespace {

int cmd_train(const std::string& config_path, std::size_t runs, const std::string& output) {
  TrainConfig config = load_config(config_path);
  if (!output.empty()) config.output_dir = output;
  TrainOptions opts;
  opts.log = &std::cout;
  std::cout << kMetricsHeader << "\n";
  if (runs <= 1) {
    auto r = train(config, opts);
    std::cout << "final_val_acc " << r.rows.back().val_acc << "\n"
              << "metrics " << r.metrics_path.string() << "\n"
              << "checkpoint " << r.final_checkpoint.string() << "\n";
    return 0;
  }
  auto results = train_runs(config, runs, opts);
  std::size_t best = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    std::cout << "run " << i << " final_val_acc " << results[i].rows.back().val_acc << "\n";
    if (results[i].rows.back().val_acc > results[best].rows.back().val_acc) best = i;
  }
  std::cout << "best_run " << best << " val_acc " << results[best].rows.back().val_acc << "\n";
  return 0;
}

// --data is a CIFAR-10 .bin file, a directory holding the binary batches
// (test split is used), or "synth" for the validation set the config generates.
std::vector<LabeledImage> eval_data(const std::string& spec, const TrainConfig& config) {
  if (spec == "synth") return load_datasets(config).val;
  const fs::path p(spec);
  if (fs::is_regular_file(p)) return load_cifar10(p);
  if (auto dir = find_cifar10_dir(p)) return load_cifar10_split(*dir, Split::Test);
  throw DataError("no dataset at " + spec);
}

int cmd_eval(const std::string& ckpt_path, const std::string& data_spec) {
  const Checkpoint ckpt = read_checkpoint(ckpt_path);
  const TrainConfig config = ckpt.config();
  Model<float> model = restore_model<float>(ckpt);
  const auto data = eval_data(data_spec, config);
  const double acc = evaluate(model, data, cifar10_normalization());
  std::printf("samples %zu\naccuracy %.6f\n", data.size(), acc);
  return 0;
}

int cmd_gradcheck(const std::string& layer, std::uint64_t seed, double tolerance) {
  LayerSpec<double> spec = make_layer_spec<double>(layer);
  GradCheckOptions opts;
  opts.tolerance = tolerance;
  const GradReport report = check_layer(*spec.layer, spec.input, seed, opts);
  std::cout << "layer: " << layer << "\n" << format_report(report);
  return report.passed ? 0 : 1;
}

int cmd_audit(const std::string& config_path) {
  const Audit audit = audit_params(load_config(config_path));
  std::cout << format_audit(audit);
  return audit.model_total == audit.optimizer_total ? 0 : 1;
}

int cmd_bench(const std::vector<std::size_t>& sides, const std::string& kind, std::size_t channels) {
  ProbeOptions opts;
  opts.channels = channels;
  const auto result = complexity_probe([&] { return make_bench_pool<float>(kind); }, sides, opts);
  std::printf("%-8s %-12s %-14s %-14s\n", "side", "elements", "seconds", "ns_per_elem");
  for (const auto& r : result.rows) {
    std::printf("%-8zu %-12zu %-14.6e %-14.4f%s\n", r.side, r.elements, r.seconds,
                r.seconds_per_element * 1e9, r.below_floor ? "  (below timer floor)" : "");
  }
  std::printf("loglog_slope %.4f (fitted %zu rows)\n", result.slope, result.fitted);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"percpool: perceptron pooling experiments"};
  app.require_subcommand(1);

  std::string config_path, output;
  std::size_t runs = 1;
  auto* train_cmd = app.add_subcommand("train", "train a model from a config file");
  train_cmd->add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--runs", runs, "repeat with consecutive seeds");
  train_cmd->add_option("--output", output, "override output.dir");

  std::string ckpt_path, data_spec;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  eval_cmd->add_option("--checkpoint", ckpt_path)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--data", data_spec, "CIFAR-10 .bin file or directory, or 'synth'")->required();

  std::string layer;
  std::uint64_t seed = 1;
  double tolerance = 1e-4;
  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference check of one layer");
  grad_cmd->add_option("--layer", layer)->required()->check(CLI::IsMember(layer_spec_names()));
  grad_cmd->add_option("--seed", seed);
  grad_cmd->add_option("--tolerance", tolerance);

  std::string audit_config;
  auto* audit_cmd = app.add_subcommand("audit", "per-slot parameter counts");
  audit_cmd->add_option("--config", audit_config)->required()->check(CLI::ExistingFile);

  std::vector<std::size_t> sides{64, 128, 256, 512};
  std::string kind = "perceptron";
  std::size_t channels = 4;
  auto* bench_cmd = app.add_subcommand("bench-pool", "time a pooling operator against input size");
  bench_cmd->add_option("--sizes", sides, "square input sides")->delimiter(',');
  bench_cmd->add_option("--kind", kind);
  bench_cmd->add_option("--channels", channels);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) return cmd_train(config_path, runs, output);
    if (*eval_cmd) return cmd_eval(ckpt_path, data_spec);
    if (*grad_cmd) return cmd_gradcheck(layer, seed, tolerance);
    if (*audit_cmd) return cmd_audit(audit_config);
    if (*bench_cmd) return cmd_bench(sides, kind, channels);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
