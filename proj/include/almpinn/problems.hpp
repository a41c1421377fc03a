#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "almpinn/autodiff.hpp"
#include "almpinn/network.hpp"

namespace almpinn {

enum class ProblemId { kNl1d, kBurgers };

// Residual formulas, generic over double and tape handles.

/// u_t - v1 (u_x)^2 - v2 u u_xx - u + u^2
template <class T, class V>
T nl1d_residual(const T& u, const T& ux, const T& ut, const T& uxx, const V& v1, const V& v2) {
  return ut - v1 * ux * ux - v2 * u * uxx - u + u * u;
}

/// u_t + v1 u u_x - v2 u_xx
template <class T, class V>
T burgers_residual(const T& u, const T& ux, const T& ut, const T& uxx, const V& v1, const V& v2) {
  return ut + v1 * u * ux - v2 * uxx;
}

double residual_nl1d(const Jet2& u, std::span<const double> v);
double residual_burgers(const Jet2& u, std::span<const double> v);

/// Closed-form solution {1/2 + tanh(t/4 - x/4)/2}^-1 of the nonlinear problem.
double exact_nl1d(double x, double t);
Jet2 exact_nl1d_jet(double x, double t);

/// Truncated Cole-Hopf series for viscous Burgers on (0, 1) with u(x, 0) = sin(pi x).
class BurgersSeries {
 public:
  /// Computes A_0..A_N by composite Gauss-Legendre quadrature with about
  /// `quad_points` nodes in total.
  static BurgersSeries compute(double nu, int terms, int quad_points = 2048);

  double nu() const { return nu_; }
  int terms() const { return static_cast<int>(coeffs_.size()) - 1; }
  std::span<const double> coefficients() const { return coeffs_; }

  /// Throws SingularityError when the denominator falls below 1e-14.
  double value(double x, double t) const;
  /// Term-wise differentiated series.
  Jet2 jet(double x, double t) const;

 private:
  double nu_ = 0.0;
  std::vector<double> coeffs_;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights);

struct ProblemOptions {
  double nu = 0.1;
  int series_terms = 200;
  int quad_points = 2048;
};

/// Partial derivatives of a residual with respect to the jet fields of u and
/// the coefficients v.
struct ResidualPartials {
  double value = 0.0;
  Jet2 du;
  std::array<double, 2> dv{};
};

/// One benchmark problem: operators, data functions and exact-solution oracle.
struct ProblemSpec {
  ProblemId id = ProblemId::kNl1d;
  std::string name;
  Domain domain;
  /// Coefficients used by forward solves.
  std::array<double, 2> forward_v{};
  /// Coefficients the inverse problem should recover.
  std::array<double, 2> true_v{};
  /// Oracle comparisons start at this time (series floor for Burgers).
  double t_min_oracle = 0.0;
  std::shared_ptr<const BurgersSeries> series;

  double residual(const Jet2& u, std::span<const double> v) const;
  ResidualPartials residual_partials(const Jet2& u, std::span<const double> v) const;

  double boundary_value(double x, double t) const;
  double initial_value(double x) const;
  double exact(double x, double t) const;
  Jet2 exact_jet(double x, double t) const;
};

ProblemId parse_problem_id(std::string_view id);
std::string to_string(ProblemId id);

/// Throws UnknownProblem for an unrecognised id.
ProblemSpec make_problem(std::string_view id, const ProblemOptions& options = {});

}  // namespace almpinn
