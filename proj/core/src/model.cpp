#include "percpool/model.hpp"

#include <cstdio>
#include <sstream>

#include "percpool/activation.hpp"
#include "percpool/batchnorm.hpp"
#include "percpool/conv2d.hpp"
#include "percpool/dense.hpp"
#include "percpool/errors.hpp"
#include "percpool/fixed_pool.hpp"
#include "percpool/init.hpp"
#include "percpool/mlp_pool.hpp"
#include "percpool/optim.hpp"

namespace percpool {

template <typename T>
std::vector<Parameter<T>*> Model<T>::pooling_parameters() {
  std::vector<Parameter<T>*> out;
  for (std::size_t s = 0; s < slots.size(); ++s) {
    for (auto* p : slot_layer(s).parameters()) out.push_back(p);
  }
  return out;
}

std::size_t pooling_slot_count(ModelKind model) {
  switch (model) {
    case ModelKind::ModelALike: return 2;
    case ModelKind::ModelCLike: return 3;
    case ModelKind::TinySynth: return 1;
  }
  return 0;
}

namespace {

PerceptronPoolConfig base_pool_config(const PoolSettings& s) {
  PerceptronPoolConfig c;
  c.use_bias = s.use_bias;
  c.activation = s.activation;
  c.lr_factor = s.lr_factor;
  c.wd_factor = s.wd_factor;
  return c;
}

template <typename T>
std::unique_ptr<Layer<T>> conv3x3(std::size_t in, std::size_t out) {
  return std::make_unique<Conv2d<T>>(Conv2dConfig{in, out, 3, 3, 1, 1});
}

template <typename T>
void init_layer(Layer<T>& layer, PoolInit pool_init, Rng& backbone, Rng& pool_rng) {
  if (auto* conv = dynamic_cast<Conv2d<T>*>(&layer)) {
    glorot_init(*conv, backbone);
  } else if (auto* dense = dynamic_cast<Dense<T>*>(&layer)) {
    glorot_init(*dense, backbone);
  } else if (auto* stack = dynamic_cast<MlpPoolStack<T>*>(&layer)) {
    init_pool(*stack, pool_init, pool_rng);
  } else if (auto* pool = dynamic_cast<PerceptronPool<T>*>(&layer)) {
    init_pool(*pool, pool_init, pool_rng);
  } else if (auto* seq = dynamic_cast<Sequential<T>*>(&layer)) {
    // strided-conv slots are initialized like the backbone, from the pool stream
    for (std::size_t i = 0; i < seq->size(); ++i) init_layer(seq->at(i), pool_init, pool_rng, pool_rng);
  }
}

}  // namespace

template <typename T>
std::unique_ptr<Layer<T>> make_pooling_layer(const PoolSettings& s, std::size_t channels) {
  PerceptronPoolConfig base = base_pool_config(s);
  switch (s.kind) {
    case PoolingKind::Max: return std::make_unique<FixedPool<T>>(PoolMode::Max, 2, 2, 2);
    case PoolingKind::Average: return std::make_unique<FixedPool<T>>(PoolMode::Average, 2, 2, 2);
    case PoolingKind::StridedConv: {
      auto seq = std::make_unique<Sequential<T>>("strided_conv");
      seq->add(std::make_unique<Conv2d<T>>(Conv2dConfig{channels, channels, 2, 2, 2, 0}));
      if (s.strided_conv_relu) seq->add(std::make_unique<Relu<T>>());
      return seq;
    }
    case PoolingKind::Perceptron: return std::make_unique<PerceptronPool<T>>(base);
    case PoolingKind::NnZ:
      base.sharing = SharingMode::PerChannel;
      return std::make_unique<PerceptronPool<T>>(base);
    case PoolingKind::NnField:
      base.sharing = SharingMode::PerField;
      return std::make_unique<PerceptronPool<T>>(base);
    case PoolingKind::NnTensor:
      base.sharing = SharingMode::PerTensor;
      return std::make_unique<PerceptronPool<T>>(base);
    case PoolingKind::Nn41:
      return std::make_unique<MlpPoolStack<T>>(nn_4_1(base, s.hidden_activation, s.activation));
    case PoolingKind::Nn161:
      return std::make_unique<MlpPoolStack<T>>(nn_16_1(base, s.hidden_activation, s.activation));
  }
  throw ConfigError("unhandled pooling kind");
}

template <typename T>
Model<T> build_model(const TrainConfig& config) {
  if (config.upsample != "none") {
    throw ConfigError(std::string("model ") + to_string(config.model) +
                      " has no upsampling slot; upsample must be 'none'");
  }
  if (config.num_classes() < 2) throw ConfigError("need at least 2 classes");

  Model<T> model;
  model.classes = config.num_classes();
  const std::size_t side = config.image_side();
  model.input_shape = Shape4{1, 3, side, side};

  auto add_slot = [&](std::size_t channels) {
    model.slots.push_back({model.net.size(), {}, {}});
    model.net.add(make_pooling_layer<T>(config.pool, channels));
  };
  auto conv_block = [&](std::size_t in, std::size_t out, bool bn) {
    model.net.add(conv3x3<T>(in, out));
    if (bn) model.net.add(std::make_unique<BatchNorm2d<T>>(out, config.bn_eps, config.bn_momentum));
    model.net.add(std::make_unique<Relu<T>>());
    add_slot(out);
  };

  std::size_t feat_c = 0;
  std::size_t pools = 0;
  switch (config.model) {
    case ModelKind::ModelALike:
      conv_block(3, 64, true);
      conv_block(64, 128, true);
      feat_c = 128;
      pools = 2;
      break;
    case ModelKind::ModelCLike:
      conv_block(3, 64, false);
      conv_block(64, 128, false);
      conv_block(128, 256, false);
      feat_c = 256;
      pools = 3;
      break;
    case ModelKind::TinySynth:
      conv_block(3, 8, false);
      feat_c = 8;
      pools = 1;
      break;
  }
  const std::size_t reduce = std::size_t{1} << pools;
  if (side % reduce != 0) {
    throw ConfigError("image side " + std::to_string(side) + " is not divisible by " +
                      std::to_string(reduce) + " as the pooling slots require");
  }
  const std::size_t feat_side = side / reduce;
  model.net.add(std::make_unique<Dense<T>>(feat_c * feat_side * feat_side,
                                           static_cast<std::size_t>(model.classes)));

  // bind layer by layer to record slot shapes
  Shape4 shape = model.input_shape;
  std::size_t next_slot = 0;
  for (std::size_t i = 0; i < model.net.size(); ++i) {
    Shape4 out;
    try {
      out = model.net.at(i).bind(shape);
    } catch (const Error& e) {
      throw ConfigError("layer " + std::to_string(i) + " (" + model.net.at(i).kind() + "): " + e.what());
    }
    if (next_slot < model.slots.size() && model.slots[next_slot].layer_index == i) {
      model.slots[next_slot].input = shape;
      model.slots[next_slot].output = out;
      ++next_slot;
    }
    shape = out;
  }

  Rng backbone(config.seed);
  Rng pool_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  for (std::size_t i = 0; i < model.net.size(); ++i) {
    init_layer(model.net.at(i), config.pool.init, backbone, pool_rng);
  }
  return model;
}

Audit audit_params(const TrainConfig& config) {
  Model<float> model = build_model<float>(config);
  Audit audit;
  for (std::size_t s = 0; s < model.slots.size(); ++s) {
    AuditRow row;
    row.slot = s;
    row.kind = model.slot_layer(s).kind();
    row.input = model.slots[s].input;
    row.output = model.slots[s].output;
    row.params = model.slot_layer(s).param_count();
    audit.pooling_total += row.params;
    audit.slots.push_back(row);
  }
  audit.model_total = model.net.param_count();
  Adam<float> opt;
  opt.add(model.net.parameters());
  audit.optimizer_total = opt.parameter_count();
  return audit;
}

std::string format_audit(const Audit& audit) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof(line), "%-5s %-18s %-16s %-16s %12s\n", "slot", "kind", "input", "output",
                "params");
  os << line;
  auto chw = [](const Shape4& s) {
    return std::to_string(s.channels) + "x" + std::to_string(s.height) + "x" + std::to_string(s.width);
  };
  for (const auto& r : audit.slots) {
    std::snprintf(line, sizeof(line), "%-5zu %-18s %-16s %-16s %12zu\n", r.slot, r.kind.c_str(),
                  chw(r.input).c_str(), chw(r.output).c_str(), r.params);
    os << line;
  }
  os << "pooling_total " << audit.pooling_total << "\n"
     << "model_total " << audit.model_total << "\n"
     << "optimizer_total " << audit.optimizer_total << "\n";
  return os.str();
}

template struct Model<float>;
template struct Model<double>;
template std::unique_ptr<Layer<float>> make_pooling_layer<float>(const PoolSettings&, std::size_t);
template std::unique_ptr<Layer<double>> make_pooling_layer<double>(const PoolSettings&, std::size_t);
template Model<float> build_model<float>(const TrainConfig&);
template Model<double> build_model<double>(const TrainConfig&);

}  // namespace percpool
