#include "almpinn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "almpinn/error.hpp"
#include "almpinn/format.hpp"

namespace almpinn {

ErrorReport error_report(std::span<const double> predicted, std::span<const double> exact) {
  if (predicted.empty() || predicted.size() != exact.size()) {
    throw InvalidArgument("error_report: need equal, non-empty inputs");
  }
  double diff2 = 0.0;
  double norm2 = 0.0;
  double sum_abs = 0.0;
  ErrorReport r;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - exact[i];
    diff2 += d * d;
    norm2 += exact[i] * exact[i];
    sum_abs += std::abs(d);
    r.eps_inf = std::max(r.eps_inf, std::abs(d));
  }
  if (norm2 == 0.0) throw DomainError("error_report: relative error undefined for a zero exact solution");
  r.eps_r = std::sqrt(diff2) / std::sqrt(norm2);
  r.eps_a = sum_abs / static_cast<double>(predicted.size());
  return r;
}

GridEvaluation evaluate_on_grid(const Network& net, const ProblemSpec& problem, int nx, int nt) {
  if (nx < 2 || nt < 2) throw InvalidArgument("evaluate_on_grid: need at least 2 points per axis");
  const Domain& d = problem.domain;
  const double t0 = std::max(d.t_lo, problem.t_min_oracle);
  GridEvaluation g;
  std::vector<std::pair<double, double>> pts;
  pts.reserve(static_cast<std::size_t>(nx * nt));
  for (int j = 0; j < nt; ++j) {
    const double t = t0 + (d.t_hi - t0) * j / (nt - 1.0);
    for (int i = 0; i < nx; ++i) {
      const double x = d.x_lo + (d.x_hi - d.x_lo) * i / (nx - 1.0);
      pts.emplace_back(x, t);
      g.x.push_back(x);
      g.t.push_back(t);
      g.exact.push_back(problem.exact(x, t));
    }
  }
  g.predicted = evaluate_points(net, pts);
  g.report = error_report(g.predicted, g.exact);
  g.report.nx = nx;
  g.report.nt = nt;
  g.report.problem_id = problem.name;
  return g;
}

void write_surface_csv(const GridEvaluation& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "x,t,u_pred,u_exact,abs_err\n";
  for (std::size_t i = 0; i < g.x.size(); ++i) {
    out << format_double(g.x[i]) << ',' << format_double(g.t[i]) << ',' << format_double(g.predicted[i]) << ','
        << format_double(g.exact[i]) << ',' << format_double(std::abs(g.predicted[i] - g.exact[i])) << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_metrics_csv(const ErrorReport& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "problem,nx,nt,eps_r,eps_inf,eps_a\n";
  out << r.problem_id << ',' << r.nx << ',' << r.nt << ',' << format_double(r.eps_r) << ','
      << format_double(r.eps_inf) << ',' << format_double(r.eps_a) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace almpinn
