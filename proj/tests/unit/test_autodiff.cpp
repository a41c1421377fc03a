#include <gtest/gtest.h>

#include <cmath>

#include "almpinn/autodiff.hpp"
#include "almpinn/error.hpp"
#include "almpinn/network.hpp"
#include "almpinn/rng.hpp"

using namespace almpinn;

namespace {

void expect_jet(const Jet2& j, std::array<double, 6> want, double tol = 0.0) {
  for (int f = 0; f < kJetFields; ++f) EXPECT_NEAR(j[static_cast<Field>(f)], want[f], tol) << "field " << f;
}

}  // namespace

TEST(SeedInput, UnitSeeds) {
  auto [jx, jt] = seed_input(3.0, 0.5);
  expect_jet(jx, {3.0, 1, 0, 0, 0, 0});
  expect_jet(jt, {0.5, 0, 1, 0, 0, 0});
  auto [zx, zt] = seed_input(0.0, 0.0);
  expect_jet(zx, {0, 1, 0, 0, 0, 0});
  expect_jet(zt, {0, 0, 1, 0, 0, 0});
  auto [ax, at] = seed_input(1.0, 4.0);
  EXPECT_EQ(at.gt, 1.0);
  EXPECT_EQ(at.gx, 0.0);
}

TEST(JetOps, HandValues) {
  auto [x3, t_] = seed_input(3.0, 0.0);
  expect_jet(square(x3), {9, 6, 0, 2, 0, 0});
  auto [x0, t0] = seed_input(0.0, 0.0);
  expect_jet(tanh(x0), {0, 1, 0, 0, 0, 0});
  auto [x2, t5] = seed_input(2.0, 5.0);
  expect_jet(x2 * t5, {10, 5, 2, 0, 1, 0});
}

TEST(JetOps, ChainRuleAgainstClosedForms) {
  // f = exp(sin(x t)) at (0.4, 1.3); derivatives written out by hand.
  const double x = 0.4, t = 1.3;
  auto [jx, jt] = seed_input(x, t);
  const Jet2 f = exp(sin(jx * jt));
  const double s = std::sin(x * t), c = std::cos(x * t), e = std::exp(s);
  const double fx = e * c * t, ft = e * c * x;
  const double fxx = e * (c * c - s) * t * t;
  const double fxt = e * (c * c - s) * x * t + e * c;
  const double ftt = e * (c * c - s) * x * x;
  expect_jet(f, {e, fx, ft, fxx, fxt, ftt}, 1e-13);
}

TEST(JetOps, LogOfNonPositiveThrows) {
  auto [x, t] = seed_input(-1.0, 0.0);
  EXPECT_THROW(log(x), DomainError);
  EXPECT_THROW(log(Jet2::constant(0.0)), DomainError);
}

TEST(JetOps, OverflowIsReported) {
  EXPECT_THROW(exp(Jet2::constant(1000.0)), OverflowError);
}

TEST(Backward, SquareOfParameter) {
  Tape tape;
  const Var w = tape.parameter(0, 3.0);
  const GradientVector g = backward(tape, square(w), 1);
  EXPECT_DOUBLE_EQ(g[0], 6.0);
}

TEST(Backward, ConstantLossHasZeroGradient) {
  Tape tape;
  tape.parameter(0, 1.5);
  tape.parameter(1, -2.0);
  const Var c = tape.constant(4.0);
  const GradientVector g = backward(tape, c, 2);
  EXPECT_EQ(g, GradientVector({0.0, 0.0}));
}

TEST(Backward, NonScalarLossIsRejected) {
  Tape tape;
  const Var w = tape.parameter(0, 2.0);
  auto [jx, jt] = seed_input(0.5, 0.5);
  const Var u = w * tape.input(jx);
  EXPECT_THROW(backward(tape, u, 1), ContractViolation);
}

TEST(Backward, ThroughDerivativeFields) {
  // loss = (d/dx (w * x^2))^2 = (2 w x)^2, d/dw = 8 w x^2.
  Tape tape;
  const Var w = tape.parameter(0, 1.7);
  auto [jx, jt] = seed_input(0.6, 0.0);
  const Var x = tape.input(jx);
  const Var u = w * square(x);
  const Var ux = tape.field(u, Field::kGx);
  const GradientVector g = backward(tape, square(ux), 1);
  EXPECT_NEAR(g[0], 8.0 * 1.7 * 0.36, 1e-13);
}

TEST(Backward, NetworkOutputSquaredMatchesFiniteDifferences) {
  Network net = init_network({2, 4, 1}, 5, Domain{});
  CounterRng rng(2);
  std::vector<double> p = net.flatten();
  for (double& v : p) v += 0.2 * rng.normal();
  net.assign(p);

  Tape tape;
  TapeNetwork tn(net, tape);
  const Var u = tn.forward(0.3, 0.7);
  const Var loss = square(tape.field(u, Field::kValue));
  const GradientVector g = backward(tape, loss, net.parameter_count());

  for (std::size_t i = 0; i < p.size(); ++i) {
    const double h = 1e-5;
    std::vector<double> a = p, b = p;
    a[i] += h;
    b[i] -= h;
    Network na = net, nb = net;
    na.assign(a);
    nb.assign(b);
    const double fa = std::pow(na.evaluate(0.3, 0.7), 2), fb = std::pow(nb.evaluate(0.3, 0.7), 2);
    const double fd = (fa - fb) / (2 * h);
    EXPECT_LE(std::abs(g[i] - fd), 1e-6 * std::max(1.0, std::abs(fd))) << "parameter " << i;
  }
}

TEST(GradCheck, Reference) {
  const GradFunction sq = [](std::span<const double> th, std::vector<double>* g) {
    if (g) *g = {2 * th[0]};
    return th[0] * th[0];
  };
  const std::vector<double> theta{3.0};
  EXPECT_LE(grad_check(sq, theta, 1e-5), 1e-9);

  const GradFunction flat = [](std::span<const double>, std::vector<double>* g) {
    if (g) *g = {0.0, 0.0};
    return 1.25;
  };
  const std::vector<double> two{0.1, 0.2};
  EXPECT_EQ(grad_check(flat, two, 1e-5), 0.0);
}
