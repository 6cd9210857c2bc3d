#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "percpool/layer.hpp"

namespace percpool {

/// Central differences (f(p + h e_i) - f(p - h e_i)) / 2h for every coordinate
/// of `params`, which is perturbed in place and restored. Throws NumericError
/// naming the coordinate if f returns a non-finite value.
std::vector<double> fd_gradient(const std::function<double()>& f, std::span<double> params,
                                double h = 1e-5);

/// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

struct GroupError {
  std::string name;
  std::size_t count = 0;
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
  std::size_t worst_index = 0;
};

struct GradReport {
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
  std::string worst_group;
  std::size_t worst_index = 0;
  std::vector<GroupError> groups;  ///< "input" first, then one per parameter
  double tolerance = 0.0;
  bool passed = false;
};

struct GradCheckOptions {
  double h = 1e-5;
  double tolerance = 1e-4;
  /// Inputs are resampled until every ReLU pre-activation / max-pool gap is
  /// at least this far from its kink.
  double min_kink_margin = 1e-3;
  std::size_t max_resamples = 500;
  /// Replace parameter values with uniform(-1, 1) samples before checking.
  bool randomize_params = true;
};

/// Compares layer.backward() against central finite differences of the
/// scalar loss sum(r * layer.forward(x)) for a random projection r, over the
/// input and every parameter. Deterministic in `seed`.
GradReport check_layer(Layer<double>& layer, const Shape4& input_shape, std::uint64_t seed,
                       const GradCheckOptions& options = {});

/// Multi-line text rendering of a report.
std::string format_report(const GradReport& report);

}  // namespace percpool
