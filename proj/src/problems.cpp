#include "almpinn/problems.hpp"

#include <cmath>
#include <numbers>

#include "almpinn/error.hpp"

namespace almpinn {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSeriesFloor = 1e-14;
constexpr int kPanelOrder = 16;

std::array<double, 2> coeff_pair(std::span<const double> v) {
  if (v.size() != 2) throw InvalidArgument("residual: expected two coefficients");
  return {v[0], v[1]};
}

}  // namespace

double residual_nl1d(const Jet2& u, std::span<const double> v) {
  const auto [v1, v2] = coeff_pair(v);
  return nl1d_residual(u.v, u.gx, u.gt, u.hxx, v1, v2);
}

double residual_burgers(const Jet2& u, std::span<const double> v) {
  const auto [v1, v2] = coeff_pair(v);
  return burgers_residual(u.v, u.gx, u.gt, u.hxx, v1, v2);
}

double exact_nl1d(double x, double t) { return 1.0 / (0.5 + 0.5 * std::tanh(t / 4.0 - x / 4.0)); }

Jet2 exact_nl1d_jet(double x, double t) {
  const auto [jx, jt] = seed_input(x, t);
  const Jet2 w = 0.25 * (jt - jx);
  return reciprocal(0.5 * tanh(w) + 0.5);
}

void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
  if (order < 1) throw InvalidArgument("gauss_legendre: order must be positive");
  nodes.assign(static_cast<std::size_t>(order), 0.0);
  weights.assign(static_cast<std::size_t>(order), 0.0);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int k = 1; k <= order; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = order * (z * p0 - p1) / (z * z - 1.0);
      const double step = p0 / dp;
      z -= step;
      if (std::abs(step) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    nodes[static_cast<std::size_t>(i)] = -z;
    nodes[static_cast<std::size_t>(order - 1 - i)] = z;
    weights[static_cast<std::size_t>(i)] = w;
    weights[static_cast<std::size_t>(order - 1 - i)] = w;
  }
}

BurgersSeries BurgersSeries::compute(double nu, int terms, int quad_points) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw InvalidArgument("BurgersSeries: viscosity must be positive");
  if (terms < 1) throw InvalidArgument("BurgersSeries: need at least one term");
  if (quad_points < 1) throw InvalidArgument("BurgersSeries: need at least one quadrature node");

  std::vector<double> gx, gw;
  gauss_legendre(kPanelOrder, gx, gw);
  const int panels = std::max(1, (quad_points + kPanelOrder - 1) / kPanelOrder);
  const double c = 1.0 / (2.0 * kPi * nu);
  const double h = 1.0 / panels;

  BurgersSeries s;
  s.nu_ = nu;
  s.coeffs_.assign(static_cast<std::size_t>(terms) + 1, 0.0);
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * h;
    for (int q = 0; q < kPanelOrder; ++q) {
      const double x = mid + 0.5 * h * gx[static_cast<std::size_t>(q)];
      const double w = 0.5 * h * gw[static_cast<std::size_t>(q)] * std::exp(-c * (1.0 - std::cos(kPi * x)));
      s.coeffs_[0] += w;
      for (int n = 1; n <= terms; ++n) s.coeffs_[static_cast<std::size_t>(n)] += 2.0 * w * std::cos(n * kPi * x);
    }
  }
  return s;
}

double BurgersSeries::value(double x, double t) const {
  double num = 0.0;
  double den = coeffs_[0];
  for (std::size_t n = 1; n < coeffs_.size(); ++n) {
    const double k = static_cast<double>(n) * kPi;
    const double e = std::exp(-k * k * nu_ * t);
    num += e * static_cast<double>(n) * coeffs_[n] * std::sin(k * x);
    den += e * coeffs_[n] * std::cos(k * x);
  }
  if (std::abs(den) < kSeriesFloor) throw SingularityError("Burgers series: vanishing denominator");
  return 2.0 * kPi * nu_ * num / den;
}

Jet2 BurgersSeries::jet(double x, double t) const {
  Jet2 num;
  Jet2 den = Jet2::constant(coeffs_[0]);
  for (std::size_t n = 1; n < coeffs_.size(); ++n) {
    const double k = static_cast<double>(n) * kPi;
    const double rate = -k * k * nu_;
    const double e = std::exp(rate * t);
    const double sn = std::sin(k * x);
    const double cn = std::cos(k * x);
    const double an = coeffs_[n];
    const double wn = static_cast<double>(n) * an;
    num.v += wn * e * sn;
    num.gx += wn * e * k * cn;
    num.gt += wn * rate * e * sn;
    num.hxx += -wn * k * k * e * sn;
    num.hxt += wn * rate * k * e * cn;
    num.htt += wn * rate * rate * e * sn;
    den.v += an * e * cn;
    den.gx += -an * k * e * sn;
    den.gt += an * rate * e * cn;
    den.hxx += -an * k * k * e * cn;
    den.hxt += -an * rate * k * e * sn;
    den.htt += an * rate * rate * e * cn;
  }
  if (std::abs(den.v) < kSeriesFloor) throw SingularityError("Burgers series: vanishing denominator");
  return (2.0 * kPi * nu_) * (num * reciprocal(den));
}

double ProblemSpec::residual(const Jet2& u, std::span<const double> v) const {
  return id == ProblemId::kNl1d ? residual_nl1d(u, v) : residual_burgers(u, v);
}

ResidualPartials ProblemSpec::residual_partials(const Jet2& u, std::span<const double> v) const {
  const auto [v1, v2] = coeff_pair(v);
  ResidualPartials p;
  p.value = residual(u, v);
  p.du.gt = 1.0;
  if (id == ProblemId::kNl1d) {
    p.du.v = -v2 * u.hxx - 1.0 + 2.0 * u.v;
    p.du.gx = -2.0 * v1 * u.gx;
    p.du.hxx = -v2 * u.v;
    p.dv = {-u.gx * u.gx, -u.v * u.hxx};
  } else {
    p.du.v = v1 * u.gx;
    p.du.gx = v1 * u.v;
    p.du.hxx = -v2;
    p.dv = {u.v * u.gx, -u.hxx};
  }
  return p;
}

double ProblemSpec::boundary_value(double x, double t) const {
  if (id == ProblemId::kNl1d) return 1.0 / (std::tanh(t / 4.0 - x / 4.0) / 2.0 + 0.5);
  return 0.0;
}

double ProblemSpec::initial_value(double x) const {
  if (id == ProblemId::kNl1d) return 1.0 / (std::tanh(-x / 4.0) / 2.0 + 0.5);
  return std::sin(kPi * x);
}

double ProblemSpec::exact(double x, double t) const {
  if (id == ProblemId::kNl1d) return exact_nl1d(x, t);
  if (t <= domain.t_lo) return initial_value(x);
  return series->value(x, t);
}

Jet2 ProblemSpec::exact_jet(double x, double t) const {
  if (id == ProblemId::kNl1d) return exact_nl1d_jet(x, t);
  return series->jet(x, t);
}

ProblemId parse_problem_id(std::string_view id) {
  if (id == "nl1d") return ProblemId::kNl1d;
  if (id == "burgers") return ProblemId::kBurgers;
  throw UnknownProblem("unknown problem '" + std::string(id) + "' (expected nl1d or burgers)");
}

std::string to_string(ProblemId id) { return id == ProblemId::kNl1d ? "nl1d" : "burgers"; }

ProblemSpec make_problem(std::string_view id, const ProblemOptions& options) {
  ProblemSpec p;
  p.id = parse_problem_id(id);
  p.name = to_string(p.id);
  if (p.id == ProblemId::kNl1d) {
    p.domain = Domain{0.0, 1.0, 0.0, 4.0};
    p.forward_v = {2.0, 2.0};
    p.true_v = {2.0, 2.0};
  } else {
    p.domain = Domain{0.0, 1.0, 0.0, 1.0};
    p.forward_v = {1.0, options.nu};
    p.true_v = {1.0, options.nu};
    p.t_min_oracle = 1e-3;
    p.series = std::make_shared<const BurgersSeries>(
        BurgersSeries::compute(options.nu, options.series_terms, options.quad_points));
  }
  return p;
}

}  // namespace almpinn
