#include "almpinn/loss.hpp"

#include <cmath>
#include <numbers>

#include "almpinn/error.hpp"

namespace almpinn {
namespace {

void check_sizes(std::span<const double> pred, std::span<const double> obs, std::span<double> dpred) {
  if (pred.size() != obs.size()) throw InvalidArgument("data term: prediction/observation size mismatch");
  if (pred.empty()) throw InvalidArgument("data term: no observations");
  if (!dpred.empty() && dpred.size() != pred.size()) throw InvalidArgument("data term: gradient buffer size");
}

void check_scale(double s, const char* what) {
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument(std::string("data term: ") + what + " must be positive");
}

double mean_square(std::span<const double> r) {
  double s = 0.0;
  for (double e : r) s += e * e;
  return s / static_cast<double>(r.size());
}

}  // namespace

MuRule parse_mu_rule(std::string_view name) {
  if (name == "product") return MuRule::kProduct;
  if (name == "nonshrinking") return MuRule::kNonShrinking;
  if (name == "growth") return MuRule::kGrowth;
  throw ConfigError("unknown mu rule '" + std::string(name) + "' (expected product, nonshrinking or growth)");
}

std::string to_string(MuRule rule) {
  switch (rule) {
    case MuRule::kProduct: return "product";
    case MuRule::kNonShrinking: return "nonshrinking";
    case MuRule::kGrowth: return "growth";
  }
  return "?";
}

void AlmState::validate() const {
  for (double m : mu) {
    if (!(m > 0.0) || !(m <= mu_max)) throw InvalidArgument("ALM: mu must satisfy 0 < mu <= mu_max");
  }
  for (double l : lambda) {
    if (!std::isfinite(l)) throw InvalidArgument("ALM: multipliers must be finite");
  }
  if (!(eps >= 0.0) || !(delta >= 0.0)) throw InvalidArgument("ALM: tolerances must be non-negative");
  if (rule == MuRule::kGrowth && !(growth > 1.0)) throw InvalidArgument("ALM: growth factor must exceed 1");
}

DataTermKind parse_data_term(std::string_view name) {
  if (name == "gaussian" || name == "l2") return DataTermKind::kGaussian;
  if (name == "laplace" || name == "l1") return DataTermKind::kLaplace;
  if (name == "lognormal" || name == "logn") return DataTermKind::kLognormal;
  throw ConfigError("unknown data term '" + std::string(name) + "' (expected gaussian, laplace or lognormal)");
}

std::string to_string(DataTermKind kind) {
  switch (kind) {
    case DataTermKind::kGaussian: return "gaussian";
    case DataTermKind::kLaplace: return "laplace";
    case DataTermKind::kLognormal: return "lognormal";
  }
  return "?";
}

DataTerm DataTerm::standard(DataTermKind kind) {
  switch (kind) {
    case DataTermKind::kGaussian: return {kind, std::numbers::sqrt2 / 2.0};
    case DataTermKind::kLaplace: return {kind, 1.0};
    case DataTermKind::kLognormal: return {kind, 1.0};
  }
  return {};
}

double data_term_gaussian(std::span<const double> pred, std::span<const double> obs, double sigma,
                          std::span<double> dpred) {
  check_sizes(pred, obs, dpred);
  check_scale(sigma, "sigma");
  const double n = static_cast<double>(pred.size());
  const double k = 1.0 / (2.0 * sigma * sigma);
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = obs[i] - pred[i];
    s += r * r;
    if (!dpred.empty()) dpred[i] = -2.0 * k * r / n;
  }
  return k * s / n;
}

double data_term_laplace(std::span<const double> pred, std::span<const double> obs, double gamma,
                         std::span<double> dpred) {
  check_sizes(pred, obs, dpred);
  check_scale(gamma, "gamma");
  const double n = static_cast<double>(pred.size());
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = obs[i] - pred[i];
    s += std::abs(r);
    if (!dpred.empty()) dpred[i] = r > 0.0 ? -1.0 / (gamma * n) : (r < 0.0 ? 1.0 / (gamma * n) : 0.0);
  }
  return s / (gamma * n);
}

DataTermValue data_term_lognormal(std::span<const double> pred, std::span<const double> obs, double sigma,
                                  std::span<double> dpred) {
  check_sizes(pred, obs, dpred);
  check_scale(sigma, "sigma");
  const double n = static_cast<double>(pred.size());
  const double s2 = sigma * sigma;
  const double c = std::log(std::sqrt(2.0 * std::numbers::pi) * sigma);
  DataTermValue out;
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double r = obs[i] - pred[i];
    const bool clamped = !(r > kLognormalFloor);
    if (clamped) {
      r = kLognormalFloor;
      ++out.clamped;
    }
    const double lr = std::log(r);
    s += c + lr + lr * lr / (2.0 * s2);
    if (!dpred.empty()) dpred[i] = clamped ? 0.0 : -(1.0 + lr / s2) / (r * n);
  }
  out.value = s / n;
  out.degenerate = out.clamped == pred.size();
  return out;
}

DataTermValue evaluate_data_term(const DataTerm& term, std::span<const double> pred, std::span<const double> obs,
                                 std::span<double> dpred) {
  switch (term.kind) {
    case DataTermKind::kGaussian: return {data_term_gaussian(pred, obs, term.param, dpred), 0, false};
    case DataTermKind::kLaplace: return {data_term_laplace(pred, obs, term.param, dpred), 0, false};
    case DataTermKind::kLognormal: return data_term_lognormal(pred, obs, term.param, dpred);
  }
  throw InvalidArgument("unknown data term");
}

LossBreakdown combine_pinns(const LossComponents& c, const PinnsWeights& w, bool inverse) {
  LossBreakdown b{0.0, c.gover, c.bc, c.ic, c.data, 0.0};
  b.total = w.gover * c.gover + w.bc * c.bc + w.ic * c.ic + (inverse ? w.data * c.data : 0.0);
  b.penalty = inverse ? c.gover * c.gover + c.data * c.data : c.bc * c.bc + c.ic * c.ic;
  return b;
}

LossBreakdown combine_alm_forward(const LossComponents& c, const AlmState& s) {
  LossBreakdown b{0.0, c.gover, c.bc, c.ic, c.data, 0.0};
  b.penalty = c.bc * c.bc + c.ic * c.ic;
  b.total = c.gover + s.lambda[0] * c.bc + s.lambda[1] * c.ic + 0.5 * s.mu[0] * b.penalty;
  return b;
}

LossBreakdown combine_alm_inverse(const LossComponents& c, const AlmState& s) {
  LossBreakdown b{0.0, c.gover, c.bc, c.ic, c.data, 0.0};
  b.penalty = c.gover * c.gover + c.data * c.data;
  b.total = c.bc + c.ic + s.lambda[0] * c.gover + s.lambda[1] * c.data + 0.5 * s.mu[0] * c.gover * c.gover +
            0.5 * s.mu[1] * c.data * c.data;
  return b;
}

ComponentWeights sensitivities_pinns(const PinnsWeights& w, bool inverse) {
  return {w.gover, w.bc, w.ic, inverse ? w.data : 0.0};
}

ComponentWeights sensitivities_alm_forward(const LossComponents& c, const AlmState& s) {
  return {1.0, s.lambda[0] + s.mu[0] * c.bc, s.lambda[1] + s.mu[0] * c.ic, 0.0};
}

ComponentWeights sensitivities_alm_inverse(const LossComponents& c, const AlmState& s) {
  return {s.lambda[0] + s.mu[0] * c.gover, 1.0, 1.0, s.lambda[1] + s.mu[1] * c.data};
}

std::array<double, 2> residual_coeffs(const Network& net, const ProblemSpec& problem) {
  if (net.coeffs().empty()) return problem.forward_v;
  if (net.coeffs().size() != 2) throw InvalidArgument("network must carry exactly two coefficients");
  return {net.coeffs()[0], net.coeffs()[1]};
}

LossEvaluator::LossEvaluator(const ProblemSpec& problem, const Dataset& data, DataTerm term)
    : problem_(problem), data_(data), term_(term) {
  set_interior(data_.interior);
}

void LossEvaluator::set_interior(std::vector<std::pair<double, double>> interior) {
  data_.interior = std::move(interior);
  value_points_.clear();
  value_points_.reserve(data_.boundary.size() + data_.initial.size() + data_.additional.size());
  for (const Sample& s : data_.boundary) value_points_.emplace_back(s.x, s.t);
  for (const Sample& s : data_.initial) value_points_.emplace_back(s.x, s.t);
  for (const Sample& s : data_.additional) value_points_.emplace_back(s.x, s.t);
  net_ = nullptr;
}

LossComponents LossEvaluator::evaluate(const Network& net, bool with_data, bool training,
                                       std::uint64_t dropout_seed) {
  if (data_.interior.empty()) throw InvalidArgument("loss: no interior collocation points");
  if (with_data && data_.additional.empty()) throw InvalidArgument("loss: inverse problem without measurements");
  const std::size_t nb = data_.boundary.size();
  const std::size_t ni = data_.initial.size();
  const std::size_t ne = with_data ? data_.additional.size() : 0;
  const std::span<const std::pair<double, double>> values(value_points_.data(), nb + ni + ne);

  v_ = residual_coeffs(net, problem_);
  const auto& out = batch_.forward(net, data_.interior, values, JetOrder::kSpatial, training, dropout_seed);
  net_ = &net;
  with_data_ = with_data;

  LossComponents c;
  residuals_.resize(out.jets.size());
  double sf = 0.0;
  for (std::size_t i = 0; i < out.jets.size(); ++i) {
    residuals_[i] = problem_.residual_partials(out.jets[i], v_);
    sf += residuals_[i].value * residuals_[i].value;
  }
  c.gover = sf / static_cast<double>(out.jets.size());

  bc_err_.resize(nb);
  for (std::size_t i = 0; i < nb; ++i) bc_err_[i] = out.values[i] - data_.boundary[i].target;
  ic_err_.resize(ni);
  for (std::size_t i = 0; i < ni; ++i) ic_err_[i] = out.values[nb + i] - data_.initial[i].target;
  if (nb > 0) c.bc = mean_square(bc_err_);
  if (ni > 0) c.ic = mean_square(ic_err_);

  data_dpred_.clear();
  if (with_data) {
    std::vector<double> obs(ne);
    for (std::size_t i = 0; i < ne; ++i) obs[i] = data_.additional[i].target;
    data_dpred_.resize(ne);
    const auto d = evaluate_data_term(term_, std::span(out.values).subspan(nb + ni, ne), obs, data_dpred_);
    c.data = d.value;
    c.clamped = d.clamped;
  }
  return c;
}

std::vector<double> LossEvaluator::gradient(const ComponentWeights& w) const {
  if (net_ == nullptr) throw ContractViolation("LossEvaluator::gradient before evaluate");
  const std::size_t nf = residuals_.size();
  const std::size_t nb = bc_err_.size();
  const std::size_t ni = ic_err_.size();
  const std::size_t ne = data_dpred_.size();

  BatchEvaluator::Adjoints adj;
  adj.jets.resize(nf);
  std::array<double, 2> gv{0.0, 0.0};
  const double kf = 2.0 * w.gover / static_cast<double>(nf);
  for (std::size_t i = 0; i < nf; ++i) {
    const ResidualPartials& p = residuals_[i];
    const double a = kf * p.value;
    adj.jets[i] = Jet2{a * p.du.v, a * p.du.gx, a * p.du.gt, a * p.du.hxx, 0.0, 0.0};
    gv[0] += a * p.dv[0];
    gv[1] += a * p.dv[1];
  }
  adj.values.resize(nb + ni + ne);
  for (std::size_t i = 0; i < nb; ++i) adj.values[i] = 2.0 * w.bc * bc_err_[i] / static_cast<double>(nb);
  for (std::size_t i = 0; i < ni; ++i) adj.values[nb + i] = 2.0 * w.ic * ic_err_[i] / static_cast<double>(ni);
  for (std::size_t i = 0; i < ne; ++i) adj.values[nb + ni + i] = w.data * data_dpred_[i];

  std::vector<double> grad = batch_.backward(adj);
  if (!net_->coeffs().empty()) grad.insert(grad.end(), gv.begin(), gv.end());
  return grad;
}

LossBreakdown pinns_loss(const Network& net, const ProblemSpec& problem, const Dataset& data,
                         const PinnsWeights& weights) {
  const bool inverse = !data.additional.empty();
  LossEvaluator ev(problem, data);
  return combine_pinns(ev.evaluate(net, inverse), weights, inverse);
}

LossBreakdown alm_forward_loss(const Network& net, const ProblemSpec& problem, const Dataset& data,
                               const AlmState& state) {
  state.validate();
  LossEvaluator ev(problem, data);
  return combine_alm_forward(ev.evaluate(net, false), state);
}

LossBreakdown alm_inverse_loss(const Network& net, const ProblemSpec& problem, const Dataset& data,
                               const AlmState& state, const DataTerm& term) {
  state.validate();
  LossEvaluator ev(problem, data, term);
  return combine_alm_inverse(ev.evaluate(net, true), state);
}

}  // namespace almpinn
