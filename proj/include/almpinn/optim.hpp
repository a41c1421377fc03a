#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

namespace almpinn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step = 0;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
  void reset() {
    std::fill(m.begin(), m.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
    step = 0;
  }
};

/// One bias-corrected Adam update in place. `lr_scale`, when non-empty,
/// multiplies the learning rate per parameter.
void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state, double lr,
               const AdamConfig& config = {}, std::span<const double> lr_scale = {});

/// Piecewise-constant learning rate: values[k] applies from boundaries[k-1]
/// (inclusive) up to boundaries[k] (exclusive).
struct LrSchedule {
  std::vector<std::int64_t> boundaries{100, 1000, 2500};
  std::vector<double> values{1e-2, 1e-3, 5e-4, 1e-4};

  /// Throws InvalidArgument unless values.size() == boundaries.size() + 1,
  /// boundaries strictly increase and every value is positive.
  void validate() const;
  static LrSchedule constant(double lr) { return {{}, {lr}}; }
};

double lr_at(const LrSchedule& schedule, std::int64_t step);

struct ParamBounds {
  double lo = 0.0;
  double hi = 10.0;
};

/// Projects the trailing `bounds.size()` entries of `params` onto their intervals.
void clip_params(std::span<double> params, std::span<const ParamBounds> bounds);

/// Multiplies the gradient entries from `first` onwards by `weight`.
void apply_poi_weight(std::span<double> grad, std::size_t first, double weight);

double l2_norm(std::span<const double> x);

}  // namespace almpinn
