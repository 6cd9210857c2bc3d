#pragma once

#include <functional>
#include <memory>
#include <span>

#include "percpool/layer.hpp"

namespace percpool {

struct ProbeOptions {
  std::size_t batch = 1;
  std::size_t channels = 4;
  double min_seconds = 0.02;  ///< keep calling forward until at least this much time passes
  std::size_t repeats = 5;    ///< best-of repeats per size
  double floor_seconds = 2e-6;  ///< per-call times below this are measurement noise
  std::uint64_t seed = 7;
};

struct ProbeRow {
  std::size_t side = 0;
  std::size_t elements = 0;  ///< input elements n = batch*channels*side*side
  double seconds = 0.0;      ///< best per-call forward time
  double seconds_per_element = 0.0;
  bool below_floor = false;
};

struct ProbeResult {
  std::vector<ProbeRow> rows;
  double slope = 0.0;  ///< least-squares slope of log(time) vs log(n) over rows above the floor
  std::size_t fitted = 0;
};

using LayerFactory = std::function<std::unique_ptr<Layer<float>>()>;

/// Times forward passes over square inputs of the given side lengths (strictly
/// increasing) and fits time against input size on a log-log scale.
ProbeResult complexity_probe(const LayerFactory& make_layer, std::span<const std::size_t> sides,
                             const ProbeOptions& options = {});

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace percpool
