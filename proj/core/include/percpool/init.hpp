#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "percpool/conv2d.hpp"
#include "percpool/dense.hpp"
#include "percpool/mlp_pool.hpp"
#include "percpool/perceptron_pool.hpp"

namespace percpool {

using Rng = std::mt19937_64;

enum class PoolInit { Glorot, Average, Pattern };
PoolInit parse_pool_init(const std::string& s);
const char* to_string(PoolInit init);

/// sqrt(6 / (fan_in + fan_out)); both fans must be >= 1.
double glorot_bound(std::size_t fan_in, std::size_t fan_out);

/// Uniform samples in [-bound, bound] with bound = glorot_bound(fan_in, fan_out).
template <typename T>
void glorot_uniform(std::span<T> out, std::size_t fan_in, std::size_t fan_out, Rng& rng);

template <typename T>
void glorot_init(Conv2d<T>& conv, Rng& rng);
template <typename T>
void glorot_init(Dense<T>& dense, Rng& rng);
/// Pooling perceptrons: fan_in = window area, fan_out = units; bias 0.
template <typename T>
void glorot_init(PerceptronPool<T>& pool, Rng& rng);

/// Every weight 1/(window_h*window_w), every bias 0, so the layer starts out
/// as average pooling.
template <typename T>
void average_init(PerceptronPool<T>& pool);
template <typename T>
void average_init(MlpPoolStack<T>& stack);

enum class PatternClass { AllSame, Diagonal, XSplit, YSplit };
const char* to_string(PatternClass c);

/// Sign grid of a window: +1/-1 per cell, row-major.
struct SignPattern {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<int> signs;

  int at(std::size_t y, std::size_t x) const { return signs[y * width + x]; }
  friend bool operator==(const SignPattern&, const SignPattern&) = default;
};

enum class GridTransform {
  Identity,
  MirrorX,  ///< x -> W-1-x
  MirrorY,  ///< y -> H-1-y
  Rot180,
  Rot90,
  Rot270,
  Transpose,
  AntiTranspose,
};

/// Pattern of the given class with random polarity (and random split
/// position for the split classes).
SignPattern make_pattern(PatternClass cls, std::size_t h, std::size_t w, Rng& rng);

/// Picks one of the classes feasible for an h x w window uniformly.
SignPattern random_pattern(std::size_t h, std::size_t w, Rng& rng);

/// Class of a grid, or nullopt if it fits none of the four.
std::optional<PatternClass> classify(const SignPattern& p);

/// Applies a transform; the quarter-turn/transpose transforms require a square grid.
SignPattern transform(const SignPattern& p, GridTransform t);

/// Shape-preserving transforms for an h x w grid, in the order they are tried.
std::vector<GridTransform> transforms_for(std::size_t h, std::size_t w);

/// Distinct grids reachable from `base`, ordered by transforms_for().
std::vector<SignPattern> pattern_orbit(const SignPattern& base);

struct PatternInitReport {
  std::size_t bases_consumed = 0;
  std::vector<SignPattern> grids;  ///< one per unit, of the last instance initialized
};

/// One perceptron: signs from a random pattern, magnitudes uniform in
/// (0, 2/(h*w)]. Writes h*w weights.
template <typename T>
SignPattern pattern_init_single(std::span<T> weights, std::size_t h, std::size_t w, Rng& rng);

/// `units` perceptrons (weights laid out unit-major) get distinct sign grids
/// drawn from the rotation/mirror orbit of a random base; a new base is drawn
/// whenever the orbit runs out.
template <typename T>
PatternInitReport pattern_init_multi(std::span<T> weights, std::size_t units, std::size_t h,
                                     std::size_t w, Rng& rng);

/// Pattern-initializes every instance of a layer (single or multi as units
/// dictates); biases are set to 0.
template <typename T>
PatternInitReport pattern_init(PerceptronPool<T>& pool, Rng& rng);
template <typename T>
void pattern_init(MlpPoolStack<T>& stack, Rng& rng);

template <typename T>
void init_pool(PerceptronPool<T>& pool, PoolInit scheme, Rng& rng);
template <typename T>
void init_pool(MlpPoolStack<T>& stack, PoolInit scheme, Rng& rng);

}  // namespace percpool
