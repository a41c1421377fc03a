#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "almpinn/error.hpp"
#include "almpinn/metrics.hpp"

using namespace almpinn;

TEST(ErrorReport, PerfectPrediction) {
  const std::vector<double> u{1.0, -2.0, 3.0};
  const ErrorReport r = error_report(u, u);
  EXPECT_EQ(r.eps_r, 0.0);
  EXPECT_EQ(r.eps_inf, 0.0);
  EXPECT_EQ(r.eps_a, 0.0);
}

TEST(ErrorReport, UniformResidual) {
  const std::vector<double> u(4, 1.0), p(4, 2.0);
  const ErrorReport r = error_report(p, u);
  EXPECT_DOUBLE_EQ(r.eps_r, 1.0);
  EXPECT_DOUBLE_EQ(r.eps_inf, 1.0);
  EXPECT_DOUBLE_EQ(r.eps_a, 1.0);
}

TEST(ErrorReport, HandEvaluation) {
  const std::vector<double> u{4.0, 0.0, 3.0}, p{7.0, 0.0, 3.0};
  const ErrorReport r = error_report(p, u);
  EXPECT_DOUBLE_EQ(r.eps_r, 0.6);
  EXPECT_DOUBLE_EQ(r.eps_inf, 3.0);
  EXPECT_DOUBLE_EQ(r.eps_a, 1.0);
}

TEST(ErrorReport, Preconditions) {
  const std::vector<double> z(3, 0.0), a{1.0, 2.0};
  EXPECT_THROW(error_report(z, z), DomainError);
  EXPECT_THROW(error_report(a, z), InvalidArgument);
  EXPECT_THROW(error_report({}, {}), InvalidArgument);
}

TEST(Grid, ShapeAndTimeFloor) {
  const ProblemSpec p = make_problem("burgers");
  const Network net = init_network({2, 4, 1}, 1, p.domain);
  const GridEvaluation g = evaluate_on_grid(net, p, 100, 100);
  ASSERT_EQ(g.predicted.size(), 10000u);
  EXPECT_EQ(g.x[0], 0.0);
  EXPECT_EQ(g.x[99], 1.0);
  EXPECT_EQ(g.t[0], 1e-3);
  EXPECT_EQ(g.t[9999], 1.0);
  EXPECT_EQ(g.x[1], g.x[0] + (g.x[99] - g.x[0]) / 99);  // x varies fastest
  EXPECT_EQ(g.t[1], g.t[0]);
  EXPECT_EQ(g.report.nx, 100);
  EXPECT_EQ(g.report.problem_id, "burgers");
}

TEST(Grid, ExactColumnAndConstantNetwork) {
  const ProblemSpec p = make_problem("nl1d");
  Network net({2, 1}, InputScaling::identity());
  net.assign(std::vector<double>{0.0, 0.0, 2.0});  // u = 2, exact only on x = t
  const GridEvaluation g = evaluate_on_grid(net, p, 10, 10);
  for (std::size_t i = 0; i < g.exact.size(); ++i) {
    EXPECT_DOUBLE_EQ(g.exact[i], exact_nl1d(g.x[i], g.t[i]));
    EXPECT_EQ(g.predicted[i], 2.0);
  }
  EXPECT_LE(error_report(g.exact, g.exact).eps_r, 1e-14);
  EXPECT_GT(g.report.eps_r, 0.0);
}

TEST(Grid, CsvRowCounts) {
  const ProblemSpec p = make_problem("nl1d");
  const Network net = init_network({2, 4, 1}, 1, p.domain);
  const GridEvaluation g = evaluate_on_grid(net, p);
  const auto dir = std::filesystem::temp_directory_path();
  write_surface_csv(g, dir / "almpinn_surface.csv");
  write_metrics_csv(g.report, dir / "almpinn_metrics.csv");
  std::ifstream s(dir / "almpinn_surface.csv");
  std::string line;
  std::getline(s, line);
  EXPECT_EQ(line, "x,t,u_pred,u_exact,abs_err");
  int rows = 0;
  while (std::getline(s, line)) ++rows;
  EXPECT_EQ(rows, 10000);
  std::ifstream m(dir / "almpinn_metrics.csv");
  std::getline(m, line);
  EXPECT_EQ(line, "problem,nx,nt,eps_r,eps_inf,eps_a");
  std::getline(m, line);
  EXPECT_EQ(line.rfind("nl1d,100,100,", 0), 0u);
  std::filesystem::remove(dir / "almpinn_surface.csv");
  std::filesystem::remove(dir / "almpinn_metrics.csv");
}
