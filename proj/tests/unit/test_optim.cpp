#include <gtest/gtest.h>

#include <cmath>

#include "almpinn/error.hpp"
#include "almpinn/optim.hpp"

using namespace almpinn;

TEST(Schedule, PiecewiseValues) {
  const LrSchedule s;
  EXPECT_EQ(lr_at(s, 0), 1e-2);
  EXPECT_EQ(lr_at(s, 50), 1e-2);
  EXPECT_EQ(lr_at(s, 99), 1e-2);
  EXPECT_EQ(lr_at(s, 100), 1e-3);
  EXPECT_EQ(lr_at(s, 999), 1e-3);
  EXPECT_EQ(lr_at(s, 1500), 5e-4);
  EXPECT_EQ(lr_at(s, 2500), 1e-4);
  EXPECT_EQ(lr_at(s, 1000000), 1e-4);
  EXPECT_EQ(lr_at(LrSchedule::constant(0.3), 12345), 0.3);
}

TEST(Schedule, Validation) {
  EXPECT_NO_THROW(LrSchedule{}.validate());
  EXPECT_THROW((LrSchedule{{10, 5}, {1, 2, 3}}.validate()), InvalidArgument);
  EXPECT_THROW((LrSchedule{{10}, {1}}.validate()), InvalidArgument);
  EXPECT_THROW((LrSchedule{{10}, {1, -1}}.validate()), InvalidArgument);
}

TEST(Adam, FirstStepIsLearningRateTimesSign) {
  std::vector<double> p{0.5, -0.2};
  const std::vector<double> g{1.0, -3.0};
  AdamState st(2);
  adam_step(p, g, st, 0.01);
  EXPECT_NEAR(p[0], 0.5 - 0.01, 1e-9);
  EXPECT_NEAR(p[1], -0.2 + 0.01, 1e-9);
  EXPECT_EQ(st.step, 1);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  std::vector<double> p{0.5, -0.2};
  const std::vector<double> g{0.0, 0.0};
  AdamState st(2);
  for (int i = 0; i < 3; ++i) adam_step(p, g, st, 0.01);
  EXPECT_EQ(p, (std::vector<double>{0.5, -0.2}));
}

TEST(Adam, ConstantGradientStepsDoNotGrow) {
  std::vector<double> p{0.0};
  const std::vector<double> g{0.7};
  AdamState st(1);
  adam_step(p, g, st, 0.01);
  const double d1 = std::abs(p[0]);
  const double before = p[0];
  adam_step(p, g, st, 0.01);
  EXPECT_LE(std::abs(p[0] - before), d1 * (1 + 1e-6));
}

TEST(Adam, MatchesHandIteration) {
  std::vector<double> p{1.0};
  AdamState st(1);
  double m = 0, v = 0, x = 1.0;
  const double grads[3] = {0.4, -0.1, 0.25};
  for (int t = 1; t <= 3; ++t) {
    const std::vector<double> g{grads[t - 1]};
    adam_step(p, g, st, 0.05);
    m = 0.9 * m + 0.1 * grads[t - 1];
    v = 0.999 * v + 0.001 * grads[t - 1] * grads[t - 1];
    const double mh = m / (1 - std::pow(0.9, t)), vh = v / (1 - std::pow(0.999, t));
    x -= 0.05 * mh / (std::sqrt(vh) + 1e-8);
    EXPECT_NEAR(p[0], x, 1e-15);
  }
}

TEST(Adam, PerParameterScale) {
  std::vector<double> p{0.0, 0.0};
  const std::vector<double> g{1.0, 1.0}, scale{1.0, 10.0};
  AdamState st(2);
  adam_step(p, g, st, 0.01, {}, scale);
  EXPECT_NEAR(p[1], 10.0 * p[0], 1e-15);
}

TEST(Adam, NonFiniteGradientThrows) {
  std::vector<double> p{0.0};
  const std::vector<double> g{std::nan("")};
  AdamState st(1);
  EXPECT_THROW(adam_step(p, g, st, 0.01), OverflowError);
}

TEST(Bounds, Clipping) {
  std::vector<double> p{99.0, 12.0, 3.0};
  const std::vector<ParamBounds> b{{0, 10}, {0, 10}};
  clip_params(p, b);
  EXPECT_EQ(p, (std::vector<double>{99.0, 10.0, 3.0}));
  std::vector<double> q{-0.5, 4.0};
  clip_params(q, b);
  EXPECT_EQ(q, (std::vector<double>{0.0, 4.0}));
}

TEST(PoiWeight, ScalesTrailingEntries) {
  std::vector<double> g{1.0, 2.0, 3.0};
  apply_poi_weight(g, 1, 1.0);
  EXPECT_EQ(g, (std::vector<double>{1.0, 2.0, 3.0}));
  apply_poi_weight(g, 1, 10.0);
  EXPECT_EQ(g, (std::vector<double>{1.0, 20.0, 30.0}));
  std::vector<double> z(3, 0.0);
  apply_poi_weight(z, 0, 10.0);
  EXPECT_EQ(z, std::vector<double>(3, 0.0));
}

TEST(Norm, L2) {
  const std::vector<double> v{3.0, 4.0};
  EXPECT_EQ(l2_norm(v), 5.0);
}
