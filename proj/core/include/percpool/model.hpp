#pragma once

#include <memory>
#include <string>
#include <vector>

#include "percpool/config.hpp"
#include "percpool/layer.hpp"

namespace percpool {

template <typename T>
struct PoolingSlot {
  std::size_t layer_index = 0;  ///< position inside Model::net
  Shape4 input;                 ///< per-example input shape (batch 1)
  Shape4 output;
};

template <typename T>
struct Model {
  Sequential<T> net{"model"};
  std::vector<PoolingSlot<T>> slots;
  Shape4 input_shape;  ///< batch 1
  int classes = 0;

  Layer<T>& slot_layer(std::size_t s) { return net.at(slots.at(s).layer_index); }
  /// Parameters of every pooling slot, in slot order.
  std::vector<Parameter<T>*> pooling_parameters();
};

/// Number of pooling slots of a reference architecture.
std::size_t pooling_slot_count(ModelKind model);

/// Constructs a pooling-slot layer for `channels` input channels.
template <typename T>
std::unique_ptr<Layer<T>> make_pooling_layer(const PoolSettings& settings, std::size_t channels);

/// Builds, binds and initializes a reference model. Convolutions and dense
/// layers draw from a stream that does not depend on the pooling choice, so
/// models differing only in pooling share their backbone initialization.
template <typename T>
Model<T> build_model(const TrainConfig& config);

struct AuditRow {
  std::size_t slot = 0;
  std::string kind;
  Shape4 input;
  Shape4 output;
  std::size_t params = 0;
};

struct Audit {
  std::vector<AuditRow> slots;
  std::size_t pooling_total = 0;
  std::size_t model_total = 0;
  std::size_t optimizer_total = 0;  ///< what an optimizer built for this model registers
};

Audit audit_params(const TrainConfig& config);
std::string format_audit(const Audit& audit);

}  // namespace percpool
