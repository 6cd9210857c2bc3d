#include "percpool/init.hpp"

#include <algorithm>
#include <cmath>

namespace percpool {

PoolInit parse_pool_init(const std::string& s) {
  if (s == "glorot") return PoolInit::Glorot;
  if (s == "average") return PoolInit::Average;
  if (s == "pattern") return PoolInit::Pattern;
  throw ConfigError("unknown pooling init '" + s + "' (glorot|average|pattern)");
}

const char* to_string(PoolInit init) {
  switch (init) {
    case PoolInit::Glorot: return "glorot";
    case PoolInit::Average: return "average";
    case PoolInit::Pattern: return "pattern";
  }
  return "?";
}

const char* to_string(PatternClass c) {
  switch (c) {
    case PatternClass::AllSame: return "all_same";
    case PatternClass::Diagonal: return "diagonal";
    case PatternClass::XSplit: return "x_split";
    case PatternClass::YSplit: return "y_split";
  }
  return "?";
}

double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
  if (fan_in == 0 || fan_out == 0) {
    throw ConfigError("glorot init needs fan_in, fan_out >= 1 (got " + std::to_string(fan_in) +
                      ", " + std::to_string(fan_out) + ")");
  }
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

template <typename T>
void glorot_uniform(std::span<T> out, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double bound = glorot_bound(fan_in, fan_out);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (T& v : out) v = static_cast<T>(dist(rng));
}

template <typename T>
void glorot_init(Conv2d<T>& conv, Rng& rng) {
  const auto& c = conv.config();
  const std::size_t area = c.kernel_h * c.kernel_w;
  glorot_uniform(conv.weight().value.data(), c.in_channels * area, c.out_channels * area, rng);
  conv.bias().value.fill(T{0});
}

template <typename T>
void glorot_init(Dense<T>& dense, Rng& rng) {
  glorot_uniform(dense.weight().value.data(), dense.in_features(), dense.out_features(), rng);
  dense.bias().value.fill(T{0});
}

template <typename T>
void glorot_init(PerceptronPool<T>& pool, Rng& rng) {
  if (!pool.bound()) throw ConfigError("perceptron pool must be bound before initialization");
  const auto& c = pool.config();
  glorot_uniform(pool.weight().value.data(), c.window_h * c.window_w, c.units, rng);
  if (auto* b = pool.bias()) b->value.fill(T{0});
}

template <typename T>
void average_init(PerceptronPool<T>& pool) {
  if (!pool.bound()) throw ConfigError("perceptron pool must be bound before initialization");
  const auto& c = pool.config();
  pool.weight().value.fill(T{1} / static_cast<T>(c.window_h * c.window_w));
  if (auto* b = pool.bias()) b->value.fill(T{0});
}

template <typename T>
void average_init(MlpPoolStack<T>& stack) {
  for (std::size_t l = 0; l < stack.depth(); ++l) average_init(stack.layer(l));
}

namespace {

SignPattern blank(std::size_t h, std::size_t w, int sign) {
  return {h, w, std::vector<int>(h * w, sign)};
}

// Main-diagonal cells; for non-square grids every row (h >= w) or column
// (w > h) holds exactly one cell.
bool on_diagonal(std::size_t y, std::size_t x, std::size_t h, std::size_t w) {
  if (h >= w) return y * w / h == x;
  return x * h / w == y;
}

SignPattern diagonal_base(std::size_t h, std::size_t w, int diag_sign) {
  SignPattern p = blank(h, w, -diag_sign);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (on_diagonal(y, x, h, w)) p.signs[y * w + x] = diag_sign;
    }
  }
  return p;
}

std::vector<PatternClass> feasible_classes(std::size_t h, std::size_t w) {
  std::vector<PatternClass> out{PatternClass::AllSame};
  if (h >= 2 && w >= 2) out.push_back(PatternClass::Diagonal);
  if (w >= 2) out.push_back(PatternClass::XSplit);
  if (h >= 2) out.push_back(PatternClass::YSplit);
  return out;
}

bool rows_constant(const SignPattern& p) {
  for (std::size_t y = 0; y < p.height; ++y) {
    for (std::size_t x = 1; x < p.width; ++x) {
      if (p.at(y, x) != p.at(y, 0)) return false;
    }
  }
  return true;
}

bool cols_constant(const SignPattern& p) {
  for (std::size_t x = 0; x < p.width; ++x) {
    for (std::size_t y = 1; y < p.height; ++y) {
      if (p.at(y, x) != p.at(0, x)) return false;
    }
  }
  return true;
}

}  // namespace

SignPattern make_pattern(PatternClass cls, std::size_t h, std::size_t w, Rng& rng) {
  if (h == 0 || w == 0) throw ConfigError("sign pattern needs a non-empty window");
  std::bernoulli_distribution coin(0.5);
  const int polarity = coin(rng) ? 1 : -1;
  switch (cls) {
    case PatternClass::AllSame:
      return blank(h, w, polarity);
    case PatternClass::Diagonal: {
      if (h < 2 || w < 2) throw ConfigError("diagonal pattern needs a window of at least 2x2");
      SignPattern p = diagonal_base(h, w, -polarity);
      if (coin(rng)) p = transform(p, GridTransform::MirrorX);
      return p;
    }
    case PatternClass::XSplit: {
      if (w < 2) throw ConfigError("x_split pattern needs window width >= 2");
      const std::size_t split = std::uniform_int_distribution<std::size_t>(1, w - 1)(rng);
      SignPattern p = blank(h, w, polarity);
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = split; x < w; ++x) p.signs[y * w + x] = -polarity;
      }
      return p;
    }
    case PatternClass::YSplit: {
      if (h < 2) throw ConfigError("y_split pattern needs window height >= 2");
      const std::size_t split = std::uniform_int_distribution<std::size_t>(1, h - 1)(rng);
      SignPattern p = blank(h, w, polarity);
      for (std::size_t y = split; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) p.signs[y * w + x] = -polarity;
      }
      return p;
    }
  }
  return blank(h, w, polarity);
}

SignPattern random_pattern(std::size_t h, std::size_t w, Rng& rng) {
  const auto classes = feasible_classes(h, w);
  const std::size_t pick = std::uniform_int_distribution<std::size_t>(0, classes.size() - 1)(rng);
  return make_pattern(classes[pick], h, w, rng);
}

std::optional<PatternClass> classify(const SignPattern& p) {
  if (p.signs.empty() || p.signs.size() != p.height * p.width) return std::nullopt;
  for (int s : p.signs) {
    if (s != 1 && s != -1) return std::nullopt;
  }
  if (std::all_of(p.signs.begin(), p.signs.end(), [&](int s) { return s == p.signs[0]; })) {
    return PatternClass::AllSame;
  }
  auto changes = [](auto&& value, std::size_t n) {
    std::size_t count = 0;
    for (std::size_t i = 1; i < n; ++i) count += value(i) != value(i - 1) ? 1 : 0;
    return count;
  };
  if (cols_constant(p) && changes([&](std::size_t x) { return p.at(0, x); }, p.width) == 1) {
    return PatternClass::XSplit;
  }
  if (rows_constant(p) && changes([&](std::size_t y) { return p.at(y, 0); }, p.height) == 1) {
    return PatternClass::YSplit;
  }
  if (p.height >= 2 && p.width >= 2) {
    for (int sign : {1, -1}) {
      const SignPattern base = diagonal_base(p.height, p.width, sign);
      for (GridTransform t : transforms_for(p.height, p.width)) {
        if (transform(base, t) == p) return PatternClass::Diagonal;
      }
    }
  }
  return std::nullopt;
}

SignPattern transform(const SignPattern& p, GridTransform t) {
  const std::size_t h = p.height;
  const std::size_t w = p.width;
  const bool square_only = t == GridTransform::Rot90 || t == GridTransform::Rot270 ||
                           t == GridTransform::Transpose || t == GridTransform::AntiTranspose;
  if (square_only && h != w) throw ConfigError("quarter-turn transforms need a square grid");
  SignPattern out = p;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      std::size_t sy = y, sx = x;  // source cell for destination (y, x)
      switch (t) {
        case GridTransform::Identity: break;
        case GridTransform::MirrorX: sx = w - 1 - x; break;
        case GridTransform::MirrorY: sy = h - 1 - y; break;
        case GridTransform::Rot180: sy = h - 1 - y; sx = w - 1 - x; break;
        case GridTransform::Rot90: sy = w - 1 - x; sx = y; break;  // clockwise
        case GridTransform::Rot270: sy = x; sx = h - 1 - y; break;
        case GridTransform::Transpose: sy = x; sx = y; break;
        case GridTransform::AntiTranspose: sy = w - 1 - x; sx = h - 1 - y; break;
      }
      out.signs[y * w + x] = p.at(sy, sx);
    }
  }
  return out;
}

std::vector<GridTransform> transforms_for(std::size_t h, std::size_t w) {
  std::vector<GridTransform> ts{GridTransform::Identity, GridTransform::MirrorX,
                                GridTransform::MirrorY, GridTransform::Rot180};
  if (h == w) {
    ts.insert(ts.end(), {GridTransform::Rot90, GridTransform::Rot270, GridTransform::Transpose,
                         GridTransform::AntiTranspose});
  }
  return ts;
}

std::vector<SignPattern> pattern_orbit(const SignPattern& base) {
  std::vector<SignPattern> orbit;
  for (GridTransform t : transforms_for(base.height, base.width)) {
    SignPattern g = transform(base, t);
    if (std::find(orbit.begin(), orbit.end(), g) == orbit.end()) orbit.push_back(std::move(g));
  }
  return orbit;
}

namespace {

template <typename T>
void apply_signs(std::span<T> weights, const SignPattern& p, Rng& rng) {
  const double cap = 2.0 / static_cast<double>(p.height * p.width);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < p.signs.size(); ++i) {
    const double magnitude = (1.0 - u(rng)) * cap;  // (0, cap]
    weights[i] = static_cast<T>(p.signs[i] * magnitude);
  }
}

// Fresh bases tried in a row without finding an unused grid before accepting
// that repeats are unavoidable.
constexpr std::size_t kMaxFruitlessBases = 64;

}  // namespace

template <typename T>
SignPattern pattern_init_single(std::span<T> weights, std::size_t h, std::size_t w, Rng& rng) {
  if (weights.size() != h * w) throw ShapeError("pattern init weight count mismatch");
  SignPattern p = random_pattern(h, w, rng);
  apply_signs(weights, p, rng);
  return p;
}

template <typename T>
PatternInitReport pattern_init_multi(std::span<T> weights, std::size_t units, std::size_t h,
                                     std::size_t w, Rng& rng) {
  if (weights.size() != units * h * w) throw ShapeError("pattern init weight count mismatch");
  PatternInitReport report;
  std::vector<SignPattern> used;
  std::vector<SignPattern> queue;
  std::size_t fruitless = 0;
  for (std::size_t unit = 0; unit < units; ++unit) {
    while (queue.empty()) {
      const SignPattern base = random_pattern(h, w, rng);
      ++report.bases_consumed;
      for (auto& g : pattern_orbit(base)) {
        if (std::find(used.begin(), used.end(), g) == used.end()) queue.push_back(std::move(g));
      }
      if (queue.empty() && ++fruitless >= kMaxFruitlessBases) {
        used.clear();
        fruitless = 0;
      }
    }
    fruitless = 0;
    SignPattern g = std::move(queue.front());
    queue.erase(queue.begin());
    apply_signs(weights.subspan(unit * h * w, h * w), g, rng);
    used.push_back(g);
    report.grids.push_back(std::move(g));
  }
  return report;
}

template <typename T>
PatternInitReport pattern_init(PerceptronPool<T>& pool, Rng& rng) {
  if (!pool.bound()) throw ConfigError("perceptron pool must be bound before initialization");
  const auto& c = pool.config();
  const std::size_t per = c.units * c.window_h * c.window_w;
  PatternInitReport report;
  std::span<T> all = pool.weight().value.data();
  for (std::size_t inst = 0; inst < pool.instances(); ++inst) {
    std::span<T> w = all.subspan(inst * per, per);
    if (c.units == 1) {
      report = PatternInitReport{1, {pattern_init_single(w, c.window_h, c.window_w, rng)}};
    } else {
      report = pattern_init_multi(w, c.units, c.window_h, c.window_w, rng);
    }
  }
  if (auto* b = pool.bias()) b->value.fill(T{0});
  return report;
}

template <typename T>
void pattern_init(MlpPoolStack<T>& stack, Rng& rng) {
  for (std::size_t l = 0; l < stack.depth(); ++l) pattern_init(stack.layer(l), rng);
}

template <typename T>
void init_pool(PerceptronPool<T>& pool, PoolInit scheme, Rng& rng) {
  switch (scheme) {
    case PoolInit::Glorot: glorot_init(pool, rng); break;
    case PoolInit::Average: average_init(pool); break;
    case PoolInit::Pattern: pattern_init(pool, rng); break;
  }
}

template <typename T>
void init_pool(MlpPoolStack<T>& stack, PoolInit scheme, Rng& rng) {
  for (std::size_t l = 0; l < stack.depth(); ++l) init_pool(stack.layer(l), scheme, rng);
}

#define PERCPOOL_INSTANTIATE(T)                                                              \
  template void glorot_uniform(std::span<T>, std::size_t, std::size_t, Rng&);                \
  template void glorot_init(Conv2d<T>&, Rng&);                                               \
  template void glorot_init(Dense<T>&, Rng&);                                                \
  template void glorot_init(PerceptronPool<T>&, Rng&);                                       \
  template void average_init(PerceptronPool<T>&);                                            \
  template void average_init(MlpPoolStack<T>&);                                              \
  template SignPattern pattern_init_single(std::span<T>, std::size_t, std::size_t, Rng&);    \
  template PatternInitReport pattern_init_multi(std::span<T>, std::size_t, std::size_t,      \
                                                std::size_t, Rng&);                          \
  template PatternInitReport pattern_init(PerceptronPool<T>&, Rng&);                         \
  template void pattern_init(MlpPoolStack<T>&, Rng&);                                        \
  template void init_pool(PerceptronPool<T>&, PoolInit, Rng&);                               \
  template void init_pool(MlpPoolStack<T>&, PoolInit, Rng&);

PERCPOOL_INSTANTIATE(float)
PERCPOOL_INSTANTIATE(double)

#undef PERCPOOL_INSTANTIATE

}  // namespace percpool
