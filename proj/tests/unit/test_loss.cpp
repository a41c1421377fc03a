#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "almpinn/error.hpp"
#include "almpinn/loss.hpp"
#include "almpinn/rng.hpp"

using namespace almpinn;
using std::numbers::pi;

namespace {

// Negative log densities written from the textbook pdfs.
double nll_gauss(double r, double s) { return -std::log(std::exp(-r * r / (2 * s * s)) / (std::sqrt(2 * pi) * s)); }
double nll_laplace(double r, double g) { return -std::log(std::exp(-std::abs(r) / g) / (2 * g)); }
double nll_lognormal(double r, double s) {
  return -std::log(std::exp(-std::log(r) * std::log(r) / (2 * s * s)) / (r * s * std::sqrt(2 * pi)));
}

std::vector<double> residual_set(std::uint64_t seed, int n, bool positive) {
  CounterRng rng(seed);
  std::vector<double> r(static_cast<std::size_t>(n));
  for (double& v : r) v = positive ? std::exp(0.5 * rng.normal()) : rng.normal();
  return r;
}

Network random_net(std::uint64_t seed, const Domain& d) {
  Network net = init_network({2, 6, 5, 1}, seed, d);
  CounterRng rng(seed + 1);
  std::vector<double> p = net.flatten();
  for (double& v : p) v += 0.3 * rng.normal();
  net.assign(p);
  return net;
}

}  // namespace

TEST(DataTerms, HandValues) {
  const std::vector<double> zero{0.0}, two{2.0};
  EXPECT_EQ(data_term_gaussian(two, two, 0.3), 0.0);
  EXPECT_DOUBLE_EQ(data_term_gaussian(zero, two, std::sqrt(0.5)), 4.0);
  const std::vector<double> p3{0, 0, 0}, o3{1, -1, 2};
  EXPECT_DOUBLE_EQ(data_term_gaussian(p3, o3, 1.0), 1.0);

  EXPECT_EQ(data_term_laplace(two, two, 0.3), 0.0);
  const std::vector<double> m3{-3.0};
  EXPECT_DOUBLE_EQ(data_term_laplace(zero, m3, 1.0), 3.0);
  const std::vector<double> p2{0, 0}, o2{1, -2};
  EXPECT_DOUBLE_EQ(data_term_laplace(p2, o2, 0.5), 3.0);

  const std::vector<double> one{1.0};
  EXPECT_NEAR(data_term_lognormal(zero, one, 1.0).value, std::log(std::sqrt(2 * pi)), 1e-15);
  EXPECT_NEAR(data_term_lognormal(zero, one, 1.0).value, 0.918939, 1e-6);
  const std::vector<double> r{1.0 / std::sqrt(2 * pi)};
  const double l = std::log(r[0]);
  EXPECT_NEAR(data_term_lognormal(zero, r, 1.0).value, l * l / 2, 1e-15);
  EXPECT_NEAR(data_term_lognormal(zero, r, 1.0).value, 0.42216, 1e-4);
}

TEST(DataTerms, StandardScalesGiveNormForms) {
  const auto r = residual_set(3, 257, false);
  const std::vector<double> pred(r.size(), 0.0);
  double sq = 0.0, ab = 0.0;
  for (double v : r) {
    sq += v * v;
    ab += std::abs(v);
  }
  const double n = static_cast<double>(r.size());
  EXPECT_NEAR(evaluate_data_term(DataTerm::standard(DataTermKind::kGaussian), pred, r).value, sq / n,
              4e-16 * sq / n);
  EXPECT_EQ(evaluate_data_term(DataTerm::standard(DataTermKind::kLaplace), pred, r).value, ab / n);
  EXPECT_EQ(DataTerm::standard(DataTermKind::kLognormal).param, 1.0);
}

TEST(DataTerms, EqualNegativeLogLikelihoodUpToConstant) {
  struct Case {
    DataTermKind kind;
    double param;
    bool positive;
    double (*nll)(double, double);
  };
  for (const Case& c : {Case{DataTermKind::kGaussian, 0.7, false, nll_gauss},
                        Case{DataTermKind::kLaplace, 1.3, false, nll_laplace},
                        Case{DataTermKind::kLognormal, 0.8, true, nll_lognormal}}) {
    std::vector<double> offsets;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto r = residual_set(seed, 40, c.positive);
      const std::vector<double> pred(r.size(), 0.0);
      double nll = 0.0;
      for (double v : r) nll += c.nll(v, c.param);
      nll /= static_cast<double>(r.size());
      offsets.push_back(evaluate_data_term({c.kind, c.param}, pred, r).value - nll);
    }
    for (double o : offsets) EXPECT_NEAR(o, offsets.front(), 1e-10) << to_string(c.kind);
  }
}

TEST(DataTerms, ArgminIsMeanForL2AndMedianForL1) {
  const std::vector<double> obs{0.3, -1.2, 2.0, 0.9, 5.0, 0.1, -0.4};
  double mean = 0.0;
  for (double v : obs) mean += v;
  mean /= static_cast<double>(obs.size());
  std::vector<double> sorted = obs;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[obs.size() / 2];

  double best2 = 1e300, arg2 = 0.0, best1 = 1e300, arg1 = 0.0;
  for (int k = -3000; k <= 6000; ++k) {
    const double c = k * 1e-3;
    const std::vector<double> pred(obs.size(), c);
    const double l2 = data_term_gaussian(pred, obs, 1.0);
    const double l1 = data_term_laplace(pred, obs, 1.0);
    if (l2 < best2) best2 = l2, arg2 = c;
    if (l1 < best1) best1 = l1, arg1 = c;
  }
  EXPECT_NEAR(arg2, mean, 1e-3);
  EXPECT_NEAR(arg1, median, 1e-3);
}

TEST(DataTerms, LognormalHasInteriorMinimum) {
  CounterRng rng(9);
  std::vector<double> obs(200);
  for (double& v : obs) v = 1.0 + std::exp(0.4 * rng.normal());
  double best = 1e300, arg = 0.0;
  for (int k = 0; k <= 2000; ++k) {
    const double c = -1.0 + k * 1e-3;  // scan c in [-1, 1]
    const std::vector<double> pred(obs.size(), c);
    const double v = data_term_lognormal(pred, obs, 0.4).value;
    if (v < best) best = v, arg = c;
  }
  EXPECT_GT(arg, -1.0 + 1e-3);
  EXPECT_LT(arg, 1.0 - 1e-3);
}

TEST(DataTerms, LognormalClampsNonPositiveResiduals) {
  const std::vector<double> pred{0.0, 2.0, 3.0}, obs{1.0, 1.0, 3.0};
  std::vector<double> d(3);
  const DataTermValue v = data_term_lognormal(pred, obs, 1.0, d);
  EXPECT_EQ(v.clamped, 2u);
  EXPECT_FALSE(v.degenerate);
  EXPECT_TRUE(std::isfinite(v.value));
  EXPECT_EQ(d[1], 0.0);
  EXPECT_EQ(d[2], 0.0);
  const std::vector<double> all{5.0, 5.0, 5.0};
  EXPECT_TRUE(data_term_lognormal(all, obs, 1.0).degenerate);
}

TEST(DataTerms, DerivativesMatchDifferences) {
  CounterRng rng(4);
  std::vector<double> pred(6), obs(6);
  for (std::size_t i = 0; i < 6; ++i) {
    pred[i] = rng.normal();
    obs[i] = pred[i] + 0.5 + std::abs(rng.normal());
  }
  for (DataTermKind k : {DataTermKind::kGaussian, DataTermKind::kLaplace, DataTermKind::kLognormal}) {
    const DataTerm term{k, 0.8};
    std::vector<double> d(6);
    evaluate_data_term(term, pred, obs, d);
    for (std::size_t i = 0; i < 6; ++i) {
      std::vector<double> a = pred, b = pred;
      a[i] += 1e-6;
      b[i] -= 1e-6;
      const double fd = (evaluate_data_term(term, a, obs).value - evaluate_data_term(term, b, obs).value) / 2e-6;
      EXPECT_NEAR(d[i], fd, 1e-8) << to_string(k) << i;
    }
  }
}

TEST(DataTerms, RejectsBadInput) {
  const std::vector<double> a{1.0}, b{1.0, 2.0};
  EXPECT_THROW(data_term_gaussian(a, b, 1.0), InvalidArgument);
  EXPECT_THROW(data_term_gaussian(a, a, 0.0), InvalidArgument);
  EXPECT_THROW(data_term_laplace(a, a, -1.0), InvalidArgument);
  EXPECT_THROW(parse_data_term("cauchy"), ConfigError);
  EXPECT_EQ(parse_data_term("l1"), DataTermKind::kLaplace);
  EXPECT_EQ(parse_data_term("l2"), DataTermKind::kGaussian);
  EXPECT_EQ(parse_data_term("logn"), DataTermKind::kLognormal);
}

TEST(Combine, PinnsWeightedSum) {
  const LossComponents c{0.5, 0.5, 0.5, 0.0, 0};
  EXPECT_DOUBLE_EQ(combine_pinns(c, {}, false).total, 1.5);
  EXPECT_DOUBLE_EQ(combine_pinns({0.4, 0.3, 0.2, 0.0, 0}, {2.0, 0.0, 0.0, 1.0}, false).total, 0.8);
  EXPECT_DOUBLE_EQ(combine_pinns({0.4, 0.3, 0.2, 0.7, 0}, {}, true).total, 1.6);
}

TEST(Combine, AlmForward) {
  AlmState s;
  s.lambda = {1, 1};
  s.mu = {4, 4};
  EXPECT_NEAR(combine_alm_forward({0.1, 0.2, 0.3, 0.0, 0}, s).total, 0.86, 1e-15);
  s.lambda = {0, 0};
  s.mu = {1e-300, 1e-300};
  EXPECT_DOUBLE_EQ(combine_alm_forward({0.1, 0.2, 0.3, 0.0, 0}, s).total, 0.1);
  s.lambda = {3, 7};
  s.mu = {9, 9};
  const LossBreakdown b = combine_alm_forward({0.25, 0.0, 0.0, 0.0, 0}, s);
  EXPECT_EQ(b.total, 0.25);
  EXPECT_EQ(b.penalty, 0.0);
}

TEST(Combine, AlmInverse) {
  AlmState s;
  s.lambda = {1, 2};
  s.mu = {2, 2};
  // components (L_B, L_I, L_F, L_E) = (0.1, 0.1, 0.2, 0.3)
  const LossBreakdown b = combine_alm_inverse({0.2, 0.1, 0.1, 0.3, 0}, s);
  EXPECT_NEAR(b.total, 1.13, 1e-15);
  EXPECT_NEAR(b.penalty, 0.04 + 0.09, 1e-15);
  s.lambda = {0, 0};
  s.mu = {1e-300, 1e-300};
  EXPECT_DOUBLE_EQ(combine_alm_inverse({0.2, 0.1, 0.1, 0.3, 0}, s).total, 0.2);
}

TEST(Combine, SensitivitiesAreDerivatives) {
  AlmState s;
  s.lambda = {0.7, 1.9};
  s.mu = {3.0, 5.0};
  const LossComponents c{0.21, 0.13, 0.34, 0.55, 0};
  const double h = 1e-6;
  auto check = [&](auto combine, const ComponentWeights& w) {
    const double want[4] = {w.gover, w.bc, w.ic, w.data};
    for (int k = 0; k < 4; ++k) {
      LossComponents a = c, b = c;
      double* pa[4] = {&a.gover, &a.bc, &a.ic, &a.data};
      double* pb[4] = {&b.gover, &b.bc, &b.ic, &b.data};
      *pa[k] += h;
      *pb[k] -= h;
      EXPECT_NEAR(want[k], (combine(a).total - combine(b).total) / (2 * h), 1e-8) << k;
    }
  };
  check([&](const LossComponents& x) { return combine_alm_forward(x, s); }, sensitivities_alm_forward(c, s));
  check([&](const LossComponents& x) { return combine_alm_inverse(x, s); }, sensitivities_alm_inverse(c, s));
  const PinnsWeights w{1.5, 2.0, 0.5, 3.0};
  check([&](const LossComponents& x) { return combine_pinns(x, w, true); }, sensitivities_pinns(w, true));
}

TEST(Combine, ExactOracleGivesZeroLoss) {
  // Components assembled from the exact solution: the residual, boundary and
  // initial mismatches all vanish, so every objective collapses to zero.
  const ProblemSpec p = make_problem("nl1d");
  const Dataset d = sample_sets(p, 100, 40, 40, 2);
  LossComponents c;
  for (const auto& [x, t] : d.interior) c.gover += std::pow(p.residual(p.exact_jet(x, t), p.forward_v), 2) / 100;
  for (const Sample& s : d.boundary) c.bc += std::pow(exact_nl1d(s.x, s.t) - s.target, 2) / 40;
  for (const Sample& s : d.initial) c.ic += std::pow(exact_nl1d(s.x, s.t) - s.target, 2) / 40;
  EXPECT_LE(combine_alm_forward(c, AlmState{}).total, 1e-20);
  EXPECT_LE(combine_alm_inverse(c, AlmState{}).total, 1e-20);
}

TEST(AlmStateTest, Validation) {
  AlmState s;
  EXPECT_NO_THROW(s.validate());
  s.mu = {0.0, 1.0};
  EXPECT_THROW(s.validate(), InvalidArgument);
  s.mu = {2e4, 1.0};
  EXPECT_THROW(s.validate(), InvalidArgument);
  EXPECT_EQ(parse_mu_rule("nonshrinking"), MuRule::kNonShrinking);
  EXPECT_THROW(parse_mu_rule("bogus"), ConfigError);
}

TEST(Evaluator, ForwardGradientMatchesFiniteDifferences) {
  const ProblemSpec p = make_problem("burgers");
  const Network net = random_net(3, p.domain);
  const Dataset d = sample_sets(p, 10, 6, 6, 1);
  AlmState s;
  s.mu_max = 10;
  s.lambda = {1.4, 0.6};
  s.mu = {2.5, 2.5};
  LossEvaluator ev(p, d);
  const auto g = ev.gradient(sensitivities_alm_forward(ev.evaluate(net, false), s));
  const auto theta = net.flatten();
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double h = 1e-5;
    auto a = theta, b = theta;
    a[i] += h;
    b[i] -= h;
    Network na = net, nb = net;
    na.assign(a);
    nb.assign(b);
    const double fd = (alm_forward_loss(na, p, d, s).total - alm_forward_loss(nb, p, d, s).total) / (2 * h);
    EXPECT_NEAR(g[i], fd, 1e-6 * std::max(1.0, std::abs(fd))) << i;
  }
}

TEST(Evaluator, InverseGradientIncludesCoefficients) {
  const ProblemSpec p = make_problem("nl1d");
  Network net = random_net(5, p.domain);
  net.set_coeffs({1.7, 2.3});
  Dataset d = sample_sets(p, 10, 6, 6, 1);
  const std::vector<double> slices{1.0, 3.0};
  attach_measurements(d, sample_additional(p, slices, 5, 2), {NoiseDistribution::kGaussian, 0.05, 3});
  AlmState s;
  s.mu_max = 10;
  s.lambda = {0.8, 1.2};
  s.mu = {2.0, 3.0};
  for (DataTermKind k : {DataTermKind::kGaussian, DataTermKind::kLaplace}) {
    const DataTerm term = DataTerm::standard(k);
    LossEvaluator ev(p, d, term);
    const auto g = ev.gradient(sensitivities_alm_inverse(ev.evaluate(net, true), s));
    const auto theta = net.flatten();
    ASSERT_EQ(g.size(), theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double h = 1e-6;
      auto a = theta, b = theta;
      a[i] += h;
      b[i] -= h;
      Network na = net, nb = net;
      na.assign(a);
      nb.assign(b);
      const double fd =
          (alm_inverse_loss(na, p, d, s, term).total - alm_inverse_loss(nb, p, d, s, term).total) / (2 * h);
      EXPECT_NEAR(g[i], fd, 1e-5 * std::max(1.0, std::abs(fd))) << to_string(k) << ' ' << i;
    }
  }
}

TEST(Evaluator, ResidualUsesNetworkCoefficients) {
  const ProblemSpec p = make_problem("nl1d");
  Network net = random_net(1, p.domain);
  EXPECT_EQ(residual_coeffs(net, p), p.forward_v);
  net.set_coeffs({0.5, 0.25});
  EXPECT_EQ(residual_coeffs(net, p), (std::array<double, 2>{0.5, 0.25}));
}

TEST(Evaluator, Preconditions) {
  const ProblemSpec p = make_problem("nl1d");
  const Network net = random_net(1, p.domain);
  LossEvaluator empty(p, sample_sets(p, 0, 2, 2, 0));
  EXPECT_THROW(empty.evaluate(net, false), InvalidArgument);
  LossEvaluator no_data(p, sample_sets(p, 4, 2, 2, 0));
  EXPECT_THROW(no_data.evaluate(net, true), InvalidArgument);
  EXPECT_THROW(no_data.gradient({}), ContractViolation);
}
