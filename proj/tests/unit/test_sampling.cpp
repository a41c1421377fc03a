#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "almpinn/error.hpp"
#include "almpinn/sampling.hpp"

using namespace almpinn;

namespace {

struct Moments {
  double mean = 0.0, var = 0.0, kurt = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  const double n = static_cast<double>(v.size());
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double m2 = 0.0, m4 = 0.0;
  for (double x : v) {
    const double d = x - m.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m4 /= n;
  m.var = m2;
  m.kurt = m4 / (m2 * m2) - 3.0;
  return m;
}

std::vector<double> noise_only(NoiseDistribution d, double level, int n, std::uint64_t seed) {
  const std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
  std::vector<double> out = add_noise(ones, {d, level, seed});
  for (double& v : out) v -= 1.0;
  return out;
}

}  // namespace

TEST(SampleSets, PaperSizesAndPlacement) {
  const ProblemSpec p = make_problem("nl1d");
  const Dataset d = sample_sets(p, 1000, 1000, 1000, 1);
  EXPECT_EQ(d.interior.size(), 1000u);
  EXPECT_EQ(d.boundary.size(), 1000u);
  EXPECT_EQ(d.initial.size(), 1000u);
  for (const auto& [x, t] : d.interior) {
    EXPECT_GT(x, 0.0);
    EXPECT_LT(x, 1.0);
    EXPECT_GT(t, 0.0);
    EXPECT_LT(t, 4.0);
  }
  int left = 0;
  for (const Sample& s : d.boundary) {
    EXPECT_TRUE(s.x == 0.0 || s.x == 1.0);
    left += s.x == 0.0;
    EXPECT_DOUBLE_EQ(s.target, exact_nl1d(s.x, s.t));
  }
  EXPECT_EQ(left, 500);
  for (const Sample& s : d.initial) {
    EXPECT_EQ(s.t, 0.0);
    EXPECT_DOUBLE_EQ(s.target, exact_nl1d(s.x, 0.0));
  }
}

TEST(SampleSets, EmptyInteriorIsValid) {
  const Dataset d = sample_sets(make_problem("burgers"), 0, 4, 4, 0);
  EXPECT_TRUE(d.interior.empty());
  EXPECT_EQ(d.boundary.size(), 4u);
  EXPECT_THROW(sample_sets(make_problem("burgers"), -1, 4, 4, 0), InvalidArgument);
}

TEST(SampleSets, Deterministic) {
  const ProblemSpec p = make_problem("burgers");
  const Dataset a = sample_sets(p, 50, 20, 20, 9), b = sample_sets(p, 50, 20, 20, 9);
  const Dataset c = sample_sets(p, 50, 20, 20, 10);
  EXPECT_EQ(a.interior, b.interior);
  EXPECT_NE(a.interior, c.interior);
}

TEST(SampleSets, GridStrategyCoversDomain) {
  const auto pts = sample_interior(make_problem("nl1d"), 100, 0, SamplingStrategy::kGrid);
  ASSERT_EQ(pts.size(), 100u);
  EXPECT_DOUBLE_EQ(pts.front().first, 0.05);
  EXPECT_DOUBLE_EQ(pts.front().second, 0.2);
}

TEST(Additional, SlicesAndCounts) {
  const ProblemSpec p = make_problem("nl1d");
  const std::vector<double> slices{1.0, 2.5};
  const auto s = sample_additional(p, slices, 50, 3);
  EXPECT_EQ(s.size(), 100u);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(s[i].t, slices[i / 50]);
    EXPECT_DOUBLE_EQ(s[i].target, exact_nl1d(s[i].x, s[i].t));
  }
}

TEST(Additional, InitialSliceCarriesInitialValues) {
  const ProblemSpec p = make_problem("burgers");
  const std::vector<double> slices{0.0};
  for (const Sample& s : sample_additional(p, slices, 10, 1)) EXPECT_DOUBLE_EQ(s.target, p.initial_value(s.x));
}

TEST(Additional, SliceOutsideDomainRejected) {
  const std::vector<double> slices{2.5, 6.6};
  EXPECT_THROW(sample_additional(make_problem("nl1d"), slices, 50, 0), InvalidArgument);
}

TEST(Additional, DefaultSlicesInsideInterval) {
  EXPECT_EQ(default_slices(make_problem("nl1d"), 2), (std::vector<double>{4.0 / 3.0, 8.0 / 3.0}));
  EXPECT_TRUE(default_slices(make_problem("nl1d"), 0).empty());
}

TEST(Noise, ZeroLevelIsIdentity) {
  const std::vector<double> v{0.3, -1.0, 2.5};
  for (auto d : {NoiseDistribution::kGaussian, NoiseDistribution::kLaplace, NoiseDistribution::kLognormal}) {
    EXPECT_EQ(add_noise(v, {d, 0.0, 4}), v);
  }
  EXPECT_THROW(add_noise(v, {NoiseDistribution::kGaussian, -0.1, 0}), InvalidArgument);
}

TEST(Noise, GaussianScale) {
  const Moments m = moments(noise_only(NoiseDistribution::kGaussian, 0.02, 10000, 1));
  EXPECT_NEAR(std::sqrt(m.var), 0.02, 0.05 * 0.02);
  EXPECT_NEAR(m.mean, 0.0, 4.0 * 0.02 / 100.0);
}

TEST(Noise, LaplaceKurtosis) {
  const Moments m = moments(noise_only(NoiseDistribution::kLaplace, 0.2, 100000, 2));
  EXPECT_NEAR(m.kurt, 3.0, 0.5);
  EXPECT_NEAR(m.mean, 0.0, 4.0 * std::sqrt(m.var / 1e5));
}

TEST(Noise, LognormalCenteredWithUnitVariance) {
  const Moments m = moments(noise_only(NoiseDistribution::kLognormal, 0.1, 200000, 3));
  EXPECT_NEAR(m.mean, 0.0, 4.0 * 0.1 / std::sqrt(2e5));
  EXPECT_NEAR(std::sqrt(m.var), 0.1, 0.005);
  const double s2 = lognormal_unit_sigma() * lognormal_unit_sigma();
  EXPECT_NEAR(std::exp(s2) - 1.0, 1.0, 1e-14);
}

TEST(Noise, ScaleFollowsRms) {
  const std::vector<double> v(1000, 3.0);
  std::vector<double> out = add_noise(v, {NoiseDistribution::kGaussian, 0.1, 5});
  for (double& x : out) x -= 3.0;
  EXPECT_NEAR(std::sqrt(moments(out).var), 0.3, 0.03);
}

TEST(Measurements, AttachKeepsCleanCopy) {
  const ProblemSpec p = make_problem("burgers");
  Dataset d = sample_sets(p, 5, 2, 2, 0);
  const std::vector<double> slices{0.25, 0.75};
  const auto clean = sample_additional(p, slices, 10, 0);
  attach_measurements(d, clean, {NoiseDistribution::kGaussian, 0.02, 7});
  ASSERT_EQ(d.additional.size(), 20u);
  ASSERT_EQ(d.additional_clean.size(), 20u);
  for (std::size_t i = 0; i < clean.size(); ++i) {
    EXPECT_EQ(d.additional_clean[i], clean[i].target);
    EXPECT_NE(d.additional[i].target, clean[i].target);
  }
}

TEST(Measurements, ExportCsv) {
  const ProblemSpec p = make_problem("nl1d");
  const Dataset d = sample_sets(p, 3, 2, 2, 0);
  const auto path = std::filesystem::temp_directory_path() / "almpinn_sets.csv";
  export_dataset_csv(d, path);
  std::ifstream in(path);
  std::string line;
  int rows = 0;
  std::getline(in, line);
  EXPECT_EQ(line, "role,x,t,target");
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 7);
  std::filesystem::remove(path);
}
