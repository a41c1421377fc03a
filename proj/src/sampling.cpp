#include "almpinn/sampling.hpp"

#include <cmath>
#include <fstream>

#include "almpinn/error.hpp"
#include "almpinn/format.hpp"
#include "almpinn/rng.hpp"

namespace almpinn {
namespace {

enum Stream : std::uint64_t { kInterior = 1, kBoundary = 2, kInitial = 3, kAdditional = 4, kNoise = 5 };

void check_count(int n, const char* what) {
  if (n < 0) throw InvalidArgument(std::string("sample count must be non-negative: ") + what);
}

}  // namespace

NoiseDistribution parse_noise_distribution(std::string_view name) {
  if (name == "gaussian" || name == "gauss" || name == "normal") return NoiseDistribution::kGaussian;
  if (name == "laplace") return NoiseDistribution::kLaplace;
  if (name == "lognormal" || name == "logn") return NoiseDistribution::kLognormal;
  throw InvalidArgument("unknown noise distribution '" + std::string(name) + "'");
}

std::string to_string(NoiseDistribution d) {
  switch (d) {
    case NoiseDistribution::kGaussian: return "gaussian";
    case NoiseDistribution::kLaplace: return "laplace";
    case NoiseDistribution::kLognormal: return "lognormal";
  }
  return "gaussian";
}

std::vector<std::pair<double, double>> sample_interior(const ProblemSpec& problem, int n_interior,
                                                       std::uint64_t seed, SamplingStrategy strategy) {
  check_count(n_interior, "interior");
  const Domain& d = problem.domain;
  std::vector<std::pair<double, double>> pts;
  pts.reserve(static_cast<std::size_t>(n_interior));
  if (strategy == SamplingStrategy::kGrid) {
    if (n_interior == 0) return pts;
    const int nx = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_interior))));
    const int nt = (n_interior + nx - 1) / nx;
    for (int k = 0; k < n_interior; ++k) {
      const int i = k % nx;
      const int j = k / nx;
      pts.emplace_back(d.x_lo + (d.x_hi - d.x_lo) * (i + 0.5) / nx, d.t_lo + (d.t_hi - d.t_lo) * (j + 0.5) / nt);
    }
    return pts;
  }
  CounterRng rng(CounterRng::derive(seed, kInterior));
  for (int k = 0; k < n_interior; ++k) {
    const double x = d.x_lo + (d.x_hi - d.x_lo) * rng.uniform_open();
    const double t = d.t_lo + (d.t_hi - d.t_lo) * rng.uniform_open();
    pts.emplace_back(x, t);
  }
  return pts;
}

Dataset sample_sets(const ProblemSpec& problem, int n_interior, int n_boundary, int n_initial,
                    std::uint64_t seed, SamplingStrategy strategy) {
  check_count(n_boundary, "boundary");
  check_count(n_initial, "initial");
  const Domain& d = problem.domain;
  Dataset data;
  data.interior = sample_interior(problem, n_interior, seed, strategy);

  CounterRng brng(CounterRng::derive(seed, kBoundary));
  const int left = (n_boundary + 1) / 2;
  data.boundary.reserve(static_cast<std::size_t>(n_boundary));
  for (int k = 0; k < n_boundary; ++k) {
    const double x = k < left ? d.x_lo : d.x_hi;
    const double t = brng.uniform(d.t_lo, d.t_hi);
    data.boundary.push_back({x, t, problem.boundary_value(x, t)});
  }

  CounterRng irng(CounterRng::derive(seed, kInitial));
  data.initial.reserve(static_cast<std::size_t>(n_initial));
  for (int k = 0; k < n_initial; ++k) {
    const double x = irng.uniform(d.x_lo, d.x_hi);
    data.initial.push_back({x, d.t_lo, problem.initial_value(x)});
  }
  return data;
}

std::vector<double> default_slices(const ProblemSpec& problem, int count) {
  if (count < 0) throw InvalidArgument("default_slices: negative count");
  const Domain& d = problem.domain;
  std::vector<double> out;
  for (int j = 1; j <= count; ++j) out.push_back(d.t_lo + (d.t_hi - d.t_lo) * j / (count + 1.0));
  return out;
}

std::vector<Sample> sample_additional(const ProblemSpec& problem, std::span<const double> slices, int x_num,
                                      std::uint64_t seed) {
  check_count(x_num, "additional");
  const Domain& d = problem.domain;
  for (double t : slices) {
    if (!(t >= d.t_lo && t <= d.t_hi)) {
      throw InvalidArgument("additional time slice " + format_double(t) + " lies outside [" +
                            format_double(d.t_lo) + ", " + format_double(d.t_hi) + "]");
    }
  }
  CounterRng rng(CounterRng::derive(seed, kAdditional));
  std::vector<Sample> out;
  out.reserve(slices.size() * static_cast<std::size_t>(x_num));
  for (double t : slices) {
    for (int i = 0; i < x_num; ++i) {
      const double x = d.x_lo + (d.x_hi - d.x_lo) * rng.uniform_open();
      out.push_back({x, t, problem.exact(x, t)});
    }
  }
  return out;
}

double lognormal_unit_sigma() { return std::sqrt(std::log(2.0)); }

std::vector<double> add_noise(std::span<const double> values, const NoiseSpec& spec) {
  if (!(spec.level >= 0.0)) throw InvalidArgument("noise level must be non-negative");
  std::vector<double> out(values.begin(), values.end());
  if (spec.level == 0.0 || values.empty()) return out;
  double sum_sq = 0.0;
  for (double v : values) sum_sq += v * v;
  const double scale = spec.level * std::sqrt(sum_sq / static_cast<double>(values.size()));
  CounterRng rng(CounterRng::derive(spec.seed, kNoise));
  const double sigma0 = lognormal_unit_sigma();
  for (double& v : out) {
    double xi = 0.0;
    switch (spec.distribution) {
      case NoiseDistribution::kGaussian: xi = rng.normal(); break;
      case NoiseDistribution::kLaplace: xi = rng.laplace(); break;
      case NoiseDistribution::kLognormal: xi = std::exp(sigma0 * rng.normal() - 0.5 * sigma0 * sigma0) - 1.0; break;
    }
    v += scale * xi;
  }
  return out;
}

void attach_measurements(Dataset& data, const std::vector<Sample>& clean, const NoiseSpec& noise) {
  std::vector<double> values;
  values.reserve(clean.size());
  for (const Sample& s : clean) values.push_back(s.target);
  const std::vector<double> noisy = add_noise(values, noise);
  data.additional = clean;
  data.additional_clean = values;
  for (std::size_t i = 0; i < clean.size(); ++i) data.additional[i].target = noisy[i];
  data.noise = noise;
}

void export_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "role,x,t,target\n";
  for (const auto& [x, t] : data.interior) out << "interior," << format_double(x) << ',' << format_double(t) << ",\n";
  auto rows = [&](const char* role, const std::vector<Sample>& samples) {
    for (const Sample& s : samples) {
      out << role << ',' << format_double(s.x) << ',' << format_double(s.t) << ',' << format_double(s.target)
          << '\n';
    }
  };
  rows("boundary", data.boundary);
  rows("initial", data.initial);
  rows("additional", data.additional);
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace almpinn
