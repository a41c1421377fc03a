#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "almpinn/problems.hpp"

namespace almpinn {

enum class NoiseDistribution { kGaussian, kLaplace, kLognormal };

NoiseDistribution parse_noise_distribution(std::string_view name);
std::string to_string(NoiseDistribution d);

struct NoiseSpec {
  NoiseDistribution distribution = NoiseDistribution::kGaussian;
  /// Relative level: noise scale is level * RMS(clean values).
  double level = 0.0;
  std::uint64_t seed = 0;
};

/// A point carrying a target value (boundary, initial or measurement).
struct Sample {
  double x = 0.0;
  double t = 0.0;
  double target = 0.0;
};

enum class SamplingStrategy { kUniform, kGrid };

struct Dataset {
  std::vector<std::pair<double, double>> interior;
  std::vector<Sample> boundary;
  std::vector<Sample> initial;
  /// Measurements (noisy targets) used by inverse problems.
  std::vector<Sample> additional;
  /// Noise-free values at the additional points.
  std::vector<double> additional_clean;
  NoiseSpec noise;
};

/// Interior points uniform on the open domain, boundary points split evenly
/// between x_lo and x_hi with uniform t, initial points uniform in x at t_lo.
Dataset sample_sets(const ProblemSpec& problem, int n_interior, int n_boundary, int n_initial,
                    std::uint64_t seed, SamplingStrategy strategy = SamplingStrategy::kUniform);

/// Redraws only the interior set (used for per-epoch resampling).
std::vector<std::pair<double, double>> sample_interior(const ProblemSpec& problem, int n_interior,
                                                       std::uint64_t seed,
                                                       SamplingStrategy strategy = SamplingStrategy::kUniform);

/// `x_num` uniform interior x positions on each time slice, valued by the exact
/// solution. Throws InvalidArgument when a slice lies outside the time interval.
std::vector<Sample> sample_additional(const ProblemSpec& problem, std::span<const double> slices, int x_num,
                                      std::uint64_t seed);

/// Slices spread evenly inside the time interval: t_lo + (t_hi - t_lo) j / (count + 1).
std::vector<double> default_slices(const ProblemSpec& problem, int count);

/// u_i + s * xi_i with s = level * RMS(u).
std::vector<double> add_noise(std::span<const double> values, const NoiseSpec& spec);

/// Lognormal draws are xi = exp(sigma0 z - sigma0^2 / 2), so E xi = 1; sigma0^2 = ln 2 gives Var xi = 1.
double lognormal_unit_sigma();

/// Fills `additional` / `additional_clean` from clean samples and a noise spec.
void attach_measurements(Dataset& data, const std::vector<Sample>& clean, const NoiseSpec& noise);

/// CSV with columns role,x,t,target.
void export_dataset_csv(const Dataset& data, const std::filesystem::path& path);

}  // namespace almpinn
