#include "percpool/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

namespace percpool {

std::vector<double> fd_gradient(const std::function<double()>& f, std::span<double> params, double h) {
  if (!(h > 0.0)) throw ConfigError("finite-difference step must be > 0");
  std::vector<double> grad(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double plus = f();
    params[i] = saved - h;
    const double minus = f();
    params[i] = saved;
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw NumericError("non-finite function value while probing coordinate " + std::to_string(i));
    }
    grad[i] = (plus - minus) / (2.0 * h);
  }
  return grad;
}

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

namespace {

GroupError compare(const std::string& name, std::span<const double> analytic,
                   std::span<const double> numeric) {
  GroupError g;
  g.name = name;
  g.count = analytic.size();
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double rel = relative_error(analytic[i], numeric[i]);
    const double abs = std::abs(analytic[i] - numeric[i]);
    g.max_abs_err = std::max(g.max_abs_err, abs);
    if (rel > g.max_rel_err) {
      g.max_rel_err = rel;
      g.worst_index = i;
    }
  }
  return g;
}

double dot(const Tensor<double>& a, const Tensor<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

GradReport check_layer(Layer<double>& layer, const Shape4& input_shape, std::uint64_t seed,
                       const GradCheckOptions& options) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);

  layer.bind(input_shape);
  auto state = layer.state();
  if (options.randomize_params) {
    for (auto& e : state) {
      if (e.param == nullptr) continue;
      for (double& v : e.tensor->data()) v = uniform(rng);
    }
  }

  Tensor<double> x(input_shape);
  bool clear = false;
  for (std::size_t attempt = 0; attempt < options.max_resamples && !clear; ++attempt) {
    for (double& v : x.data()) v = normal(rng);
    layer.forward(x, Mode::Train);
    clear = layer.kink_margin() >= options.min_kink_margin;
  }
  if (!clear) {
    throw NumericError("could not sample an input away from " + layer.kind() +
                       " non-differentiable points");
  }

  const Tensor<double> probe = layer.forward(x, Mode::Train);
  Tensor<double> r(probe.shape());
  for (double& v : r.data()) v = normal(rng);

  layer.zero_grad();
  layer.forward(x, Mode::Train);
  const Tensor<double> grad_in = layer.backward(r);

  auto loss = [&]() { return dot(layer.forward(x, Mode::Train), r); };

  GradReport report;
  report.tolerance = options.tolerance;
  {
    auto numeric = fd_gradient(loss, x.data(), options.h);
    report.groups.push_back(compare("input", grad_in.data(), numeric));
  }
  for (auto& e : state) {
    if (e.param == nullptr) continue;
    std::vector<double> analytic(e.param->grad.data().begin(), e.param->grad.data().end());
    std::vector<double> numeric;
    try {
      numeric = fd_gradient(loss, e.param->value.data(), options.h);
    } catch (const NumericError& err) {
      throw NumericError("parameter '" + e.name + "': " + err.what());
    }
    report.groups.push_back(compare(e.name, analytic, numeric));
  }
  for (const auto& g : report.groups) {
    report.max_abs_err = std::max(report.max_abs_err, g.max_abs_err);
    if (report.worst_group.empty() || g.max_rel_err > report.max_rel_err) {
      report.max_rel_err = g.max_rel_err;
      report.worst_group = g.name;
      report.worst_index = g.worst_index;
    }
  }
  report.passed = report.max_rel_err < options.tolerance;
  return report;
}

std::string format_report(const GradReport& report) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3);
  os << "status: " << (report.passed ? "PASS" : "FAIL") << "\n";
  os << "tolerance: " << report.tolerance << "\n";
  os << "max_rel_err: " << report.max_rel_err << "\n";
  os << "max_abs_err: " << report.max_abs_err << "\n";
  os << "worst: " << report.worst_group << "[" << report.worst_index << "]\n";
  os << "groups:\n";
  for (const auto& g : report.groups) {
    os << "  - name: " << g.name << "\n"
       << "    count: " << g.count << "\n"
       << "    max_rel_err: " << g.max_rel_err << "\n"
       << "    max_abs_err: " << g.max_abs_err << "\n"
       << "    worst_index: " << g.worst_index << "\n";
  }
  return os.str();
}

}  // namespace percpool
