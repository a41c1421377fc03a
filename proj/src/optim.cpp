#include "almpinn/optim.hpp"

#include <algorithm>
#include <cmath>

#include "almpinn/error.hpp"

namespace almpinn {

void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state, double lr,
               const AdamConfig& config, std::span<const double> lr_scale) {
  if (grad.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw InvalidArgument("adam_step: size mismatch");
  }
  if (!lr_scale.empty() && lr_scale.size() != params.size()) throw InvalidArgument("adam_step: lr scale size");
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      throw OverflowError("adam_step: non-finite gradient entry " + std::to_string(i) + "; step rejected");
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
    const double mh = state.m[i] / c1;
    const double vh = state.v[i] / c2;
    const double rate = lr_scale.empty() ? lr : lr * lr_scale[i];
    params[i] -= rate * mh / (std::sqrt(vh) + config.eps);
  }
}

void LrSchedule::validate() const {
  if (values.size() != boundaries.size() + 1) throw InvalidArgument("lr schedule: need one more value than boundaries");
  for (std::size_t i = 1; i < boundaries.size(); ++i) {
    if (boundaries[i] <= boundaries[i - 1]) throw InvalidArgument("lr schedule: boundaries must increase");
  }
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("lr schedule: rates must be positive");
  }
}

double lr_at(const LrSchedule& s, std::int64_t step) {
  const auto it = std::upper_bound(s.boundaries.begin(), s.boundaries.end(), step);
  return s.values.at(static_cast<std::size_t>(it - s.boundaries.begin()));
}

void clip_params(std::span<double> params, std::span<const ParamBounds> bounds) {
  if (bounds.size() > params.size()) throw InvalidArgument("clip_params: more bounds than parameters");
  const std::size_t first = params.size() - bounds.size();
  for (std::size_t k = 0; k < bounds.size(); ++k) {
    if (!(bounds[k].lo <= bounds[k].hi)) throw InvalidArgument("clip_params: empty interval");
    params[first + k] = std::clamp(params[first + k], bounds[k].lo, bounds[k].hi);
  }
}

void apply_poi_weight(std::span<double> grad, std::size_t first, double weight) {
  if (!(weight >= 0.0) || !std::isfinite(weight)) throw InvalidArgument("poi_weight must be non-negative");
  for (std::size_t i = first; i < grad.size(); ++i) grad[i] *= weight;
}

double l2_norm(std::span<const double> x) {
  double s = 0.0;
  for (double e : x) s += e * e;
  return std::sqrt(s);
}

}  // namespace almpinn
