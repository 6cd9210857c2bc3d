#include "percpool/complexity.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

namespace percpool {

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ConfigError("log-log fit needs at least two paired points");
  }
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ProbeResult complexity_probe(const LayerFactory& make_layer, std::span<const std::size_t> sides,
                             const ProbeOptions& options) {
  for (std::size_t i = 1; i < sides.size(); ++i) {
    if (sides[i] <= sides[i - 1]) throw ConfigError("probe sizes must be strictly increasing");
  }
  using Clock = std::chrono::steady_clock;
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<float> dist(0.0f, 1.0f);
  ProbeResult result;
  for (std::size_t side : sides) {
    auto layer = make_layer();
    Tensor<float> x({options.batch, options.channels, side, side});
    for (float& v : x.data()) v = dist(rng);
    layer->bind(x.shape());
    volatile float sink = layer->forward(x, Mode::Eval)[0];
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < options.repeats; ++r) {
      std::size_t calls = 0;
      const auto start = Clock::now();
      double elapsed = 0.0;
      do {
        sink = layer->forward(x, Mode::Eval)[0];
        ++calls;
        elapsed = std::chrono::duration<double>(Clock::now() - start).count();
      } while (elapsed < options.min_seconds);
      best = std::min(best, elapsed / static_cast<double>(calls));
    }
    (void)sink;
    ProbeRow row;
    row.side = side;
    row.elements = x.size();
    row.seconds = best;
    row.seconds_per_element = best / static_cast<double>(x.size());
    row.below_floor = best < options.floor_seconds;
    result.rows.push_back(row);
  }
  std::vector<double> xs, ys;
  for (const auto& r : result.rows) {
    if (r.below_floor) continue;
    xs.push_back(static_cast<double>(r.elements));
    ys.push_back(r.seconds);
  }
  result.fitted = xs.size();
  result.slope = xs.size() >= 2 ? loglog_slope(xs, ys) : std::nan("");
  return result;
}

}  // namespace percpool
