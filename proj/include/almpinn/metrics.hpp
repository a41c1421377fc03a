#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "almpinn/network.hpp"
#include "almpinn/problems.hpp"

namespace almpinn {

struct ErrorReport {
  double eps_r = 0.0;    // ||u_hat - u||_2 / ||u||_2
  double eps_inf = 0.0;  // max |u_hat - u|
  double eps_a = 0.0;    // mean |u_hat - u|
  int nx = 0;
  int nt = 0;
  std::string problem_id;
};

/// Throws InvalidArgument on empty or unequal inputs and DomainError when the
/// exact values have zero norm.
ErrorReport error_report(std::span<const double> predicted, std::span<const double> exact);

struct GridEvaluation {
  std::vector<double> x;
  std::vector<double> t;
  std::vector<double> predicted;  // x fastest
  std::vector<double> exact;
  ErrorReport report;
};

/// Uniform nx-by-nt grid over the domain; the time axis starts at
/// max(t_lo, t_min_oracle).
GridEvaluation evaluate_on_grid(const Network& net, const ProblemSpec& problem, int nx = 100, int nt = 100);

/// surface.csv: x,t,u_pred,u_exact,abs_err
void write_surface_csv(const GridEvaluation& grid, const std::filesystem::path& path);

/// metrics.csv: problem,nx,nt,eps_r,eps_inf,eps_a
void write_metrics_csv(const ErrorReport& report, const std::filesystem::path& path);

}  // namespace almpinn
