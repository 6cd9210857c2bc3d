#include "percpool/config.hpp"

#include "percpool/errors.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace percpool {

const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::ModelALike: return "model_a_like";
    case ModelKind::ModelCLike: return "model_c_like";
    case ModelKind::TinySynth: return "tiny_synth";
  }
  return "?";
}

const char* to_string(PoolingKind k) {
  switch (k) {
    case PoolingKind::Max: return "max";
    case PoolingKind::Average: return "average";
    case PoolingKind::StridedConv: return "strided_conv";
    case PoolingKind::Perceptron: return "perceptron";
    case PoolingKind::Nn41: return "nn_4_1";
    case PoolingKind::Nn161: return "nn_16_1";
    case PoolingKind::NnZ: return "nn_z";
    case PoolingKind::NnField: return "nn_field";
    case PoolingKind::NnTensor: return "nn_tensor";
  }
  return "?";
}

const char* to_string(OptimizerKind k) { return k == OptimizerKind::Sgd ? "sgd" : "adam"; }
const char* to_string(DatasetKind k) { return k == DatasetKind::Cifar10 ? "cifar10" : "synth"; }

PoolingKind parse_pooling(const std::string& s) {
  for (PoolingKind k : {PoolingKind::Max, PoolingKind::Average, PoolingKind::StridedConv,
                        PoolingKind::Perceptron, PoolingKind::Nn41, PoolingKind::Nn161,
                        PoolingKind::NnZ, PoolingKind::NnField, PoolingKind::NnTensor}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown pooling '" + s + "'");
}

bool is_perceptron_pooling(PoolingKind k) {
  return k != PoolingKind::Max && k != PoolingKind::Average && k != PoolingKind::StridedConv;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("expected a number, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("expected a boolean, got '" + v + "'");
}

std::vector<std::size_t> to_list(const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_u64(item));
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

std::string fmt(bool v) { return v ? "true" : "false"; }

std::string fmt_list(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

using Setter = std::function<void(TrainConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"model", [](TrainConfig& c, const std::string& v) {
         if (v == "model_a_like") c.model = ModelKind::ModelALike;
         else if (v == "model_c_like") c.model = ModelKind::ModelCLike;
         else if (v == "tiny_synth") c.model = ModelKind::TinySynth;
         else throw ConfigError("unknown model '" + v + "'");
       }},
      {"pooling", [](TrainConfig& c, const std::string& v) { c.pool.kind = parse_pooling(v); }},
      {"pool.init", [](TrainConfig& c, const std::string& v) { c.pool.init = parse_pool_init(v); }},
      {"pool.activation", [](TrainConfig& c, const std::string& v) { c.pool.activation = parse_activation(v); }},
      {"pool.hidden_activation",
       [](TrainConfig& c, const std::string& v) { c.pool.hidden_activation = parse_activation(v); }},
      {"pool.use_bias", [](TrainConfig& c, const std::string& v) { c.pool.use_bias = to_bool(v); }},
      {"pool.lr_factor", [](TrainConfig& c, const std::string& v) { c.pool.lr_factor = to_double(v); }},
      {"pool.wd_factor", [](TrainConfig& c, const std::string& v) { c.pool.wd_factor = to_double(v); }},
      {"pool.strided_conv_relu",
       [](TrainConfig& c, const std::string& v) { c.pool.strided_conv_relu = to_bool(v); }},
      {"upsample", [](TrainConfig& c, const std::string& v) { c.upsample = v; }},
      {"optimizer", [](TrainConfig& c, const std::string& v) {
         if (v == "sgd") c.optim.kind = OptimizerKind::Sgd;
         else if (v == "adam") c.optim.kind = OptimizerKind::Adam;
         else throw ConfigError("unknown optimizer '" + v + "'");
       }},
      {"lr", [](TrainConfig& c, const std::string& v) { c.optim.lr = to_double(v); }},
      {"momentum", [](TrainConfig& c, const std::string& v) { c.optim.momentum = to_double(v); }},
      {"beta1", [](TrainConfig& c, const std::string& v) { c.optim.beta1 = to_double(v); }},
      {"beta2", [](TrainConfig& c, const std::string& v) { c.optim.beta2 = to_double(v); }},
      {"eps", [](TrainConfig& c, const std::string& v) { c.optim.eps = to_double(v); }},
      {"weight_decay", [](TrainConfig& c, const std::string& v) { c.optim.weight_decay = to_double(v); }},
      {"schedule.epochs", [](TrainConfig& c, const std::string& v) { c.optim.decay_epochs = to_list(v); }},
      {"schedule.factor", [](TrainConfig& c, const std::string& v) { c.optim.decay_factor = to_double(v); }},
      {"batchnorm.eps", [](TrainConfig& c, const std::string& v) { c.bn_eps = to_double(v); }},
      {"batchnorm.momentum", [](TrainConfig& c, const std::string& v) { c.bn_momentum = to_double(v); }},
      {"data.dataset", [](TrainConfig& c, const std::string& v) {
         if (v == "synth") c.data.dataset = DatasetKind::Synth;
         else if (v == "cifar10") c.data.dataset = DatasetKind::Cifar10;
         else throw ConfigError("unknown dataset '" + v + "'");
       }},
      {"data.root", [](TrainConfig& c, const std::string& v) { c.data.root = v; }},
      {"data.train_size", [](TrainConfig& c, const std::string& v) { c.data.train_size = to_u64(v); }},
      {"data.val_size", [](TrainConfig& c, const std::string& v) { c.data.val_size = to_u64(v); }},
      {"data.augment", [](TrainConfig& c, const std::string& v) { c.data.augment = to_bool(v); }},
      {"data.balanced", [](TrainConfig& c, const std::string& v) { c.data.balanced = to_bool(v); }},
      {"data.batch_size", [](TrainConfig& c, const std::string& v) { c.data.batch_size = to_u64(v); }},
      {"data.classes", [](TrainConfig& c, const std::string& v) { c.data.classes = static_cast<int>(to_u64(v)); }},
      {"data.synth_train", [](TrainConfig& c, const std::string& v) { c.data.synth_train = to_u64(v); }},
      {"data.synth_val", [](TrainConfig& c, const std::string& v) { c.data.synth_val = to_u64(v); }},
      {"data.synth_size", [](TrainConfig& c, const std::string& v) { c.data.synth_size = to_u64(v); }},
      {"epochs", [](TrainConfig& c, const std::string& v) { c.epochs = to_u64(v); }},
      {"seed", [](TrainConfig& c, const std::string& v) { c.seed = to_u64(v); }},
      {"output.dir", [](TrainConfig& c, const std::string& v) { c.output_dir = v; }},
      {"output.record_wall_time",
       [](TrainConfig& c, const std::string& v) { c.record_wall_time = to_bool(v); }},
  };
  return table;
}

}  // namespace

TrainConfig parse_config(std::string_view text) {
  TrainConfig config;
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": bad section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!section.empty()) key = section + "." + key;
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    try {
      it->second(config, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + " (" + key + "): " + e.what());
    }
  }
  return config;
}

TrainConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const TrainConfig& c) {
  std::ostringstream os;
  os << "model = " << to_string(c.model) << "\n"
     << "pooling = " << to_string(c.pool.kind) << "\n"
     << "pool.init = " << to_string(c.pool.init) << "\n"
     << "pool.activation = " << to_string(c.pool.activation) << "\n"
     << "pool.hidden_activation = " << to_string(c.pool.hidden_activation) << "\n"
     << "pool.use_bias = " << fmt(c.pool.use_bias) << "\n"
     << "pool.lr_factor = " << fmt(c.pool.lr_factor) << "\n"
     << "pool.wd_factor = " << fmt(c.pool.wd_factor) << "\n"
     << "pool.strided_conv_relu = " << fmt(c.pool.strided_conv_relu) << "\n"
     << "upsample = " << c.upsample << "\n"
     << "optimizer = " << to_string(c.optim.kind) << "\n"
     << "lr = " << fmt(c.optim.lr) << "\n"
     << "momentum = " << fmt(c.optim.momentum) << "\n"
     << "beta1 = " << fmt(c.optim.beta1) << "\n"
     << "beta2 = " << fmt(c.optim.beta2) << "\n"
     << "eps = " << fmt(c.optim.eps) << "\n"
     << "weight_decay = " << fmt(c.optim.weight_decay) << "\n"
     << "schedule.epochs = " << fmt_list(c.optim.decay_epochs) << "\n"
     << "schedule.factor = " << fmt(c.optim.decay_factor) << "\n"
     << "batchnorm.eps = " << fmt(c.bn_eps) << "\n"
     << "batchnorm.momentum = " << fmt(c.bn_momentum) << "\n"
     << "data.dataset = " << to_string(c.data.dataset) << "\n"
     << "data.root = " << c.data.root << "\n"
     << "data.train_size = " << c.data.train_size << "\n"
     << "data.val_size = " << c.data.val_size << "\n"
     << "data.augment = " << fmt(c.data.augment) << "\n"
     << "data.balanced = " << fmt(c.data.balanced) << "\n"
     << "data.batch_size = " << c.data.batch_size << "\n"
     << "data.classes = " << c.data.classes << "\n"
     << "data.synth_train = " << c.data.synth_train << "\n"
     << "data.synth_val = " << c.data.synth_val << "\n"
     << "data.synth_size = " << c.data.synth_size << "\n"
     << "epochs = " << c.epochs << "\n"
     << "seed = " << c.seed << "\n"
     << "output.dir = " << c.output_dir << "\n"
     << "output.record_wall_time = " << fmt(c.record_wall_time) << "\n";
  return os.str();
}

}  // namespace percpool
