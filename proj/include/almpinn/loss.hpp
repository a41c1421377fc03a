#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "almpinn/network.hpp"
#include "almpinn/problems.hpp"
#include "almpinn/sampling.hpp"

namespace almpinn {

struct LossBreakdown {
  double total = 0.0;
  double gover_loss = 0.0;  // L_F
  double bc_ls = 0.0;       // L_B
  double ic_ls = 0.0;       // L_I
  double data_ls = 0.0;     // L_E (inverse only)
  double penalty = 0.0;     // sum of squared constraint terms
};

/// Raw loss components before they are combined into an objective.
struct LossComponents {
  double gover = 0.0;
  double bc = 0.0;
  double ic = 0.0;
  double data = 0.0;
  /// Lognormal data term only: residuals clamped to the floor.
  std::size_t clamped = 0;
};

/// d(objective) / d(component): the weights the reverse pass applies.
struct ComponentWeights {
  double gover = 0.0;
  double bc = 0.0;
  double ic = 0.0;
  double data = 0.0;
};

/// How the penalty parameter reacts when the constraints are still violated.
enum class MuRule {
  kProduct,       // mu <- min(penalty * mu, mu_max)
  kNonShrinking,  // mu <- min(max(penalty, 1) * mu, mu_max)
  kGrowth,        // mu <- min(growth * mu, mu_max)
};

MuRule parse_mu_rule(std::string_view name);
std::string to_string(MuRule rule);

/// Multipliers and penalties. Forward problems use lambda = (lambda_B, lambda_I)
/// and a single shared mu (mu[0]); inverse problems use lambda = (lambda_F,
/// lambda_E) with independent mu = (mu_F, mu_E).
struct AlmState {
  std::array<double, 2> lambda{1.0, 1.0};
  std::array<double, 2> mu{1.0, 1.0};
  double mu_max = 1.0;
  double eps = 1e-4;     // penalty tolerance
  double delta = 1e-8;   // gradient-norm tolerance
  MuRule rule = MuRule::kProduct;
  double growth = 10.0;  // used by MuRule::kGrowth

  /// Throws InvalidArgument unless 0 < mu <= mu_max and lambda is finite.
  void validate() const;
};

/// Fixed weights of the standard PINNs objective.
struct PinnsWeights {
  double gover = 1.0;
  double bc = 1.0;
  double ic = 1.0;
  double data = 1.0;
};

enum class DataTermKind { kGaussian, kLaplace, kLognormal };

/// Accepts gaussian|l2, laplace|l1, lognormal|logn.
DataTermKind parse_data_term(std::string_view name);
std::string to_string(DataTermKind kind);

struct DataTerm {
  DataTermKind kind = DataTermKind::kGaussian;
  /// sigma for gaussian and lognormal, gamma for laplace.
  double param = 0.70710678118654752;

  /// sigma^2 = 1/2 for gaussian (the mean squared residual), gamma = 1 for
  /// laplace (the mean absolute residual), sigma = 1 for lognormal.
  static DataTerm standard(DataTermKind kind);
};

inline constexpr double kLognormalFloor = 1e-12;

struct DataTermValue {
  double value = 0.0;
  std::size_t clamped = 0;
  /// Every residual hit the lognormal floor.
  bool degenerate = false;
};

/// (1/N) sum (obs - pred)^2 / (2 sigma^2). When `dpred` is non-empty it receives
/// d value / d pred.
double data_term_gaussian(std::span<const double> pred, std::span<const double> obs, double sigma,
                          std::span<double> dpred = {});
/// (1/N) sum |obs - pred| / gamma.
double data_term_laplace(std::span<const double> pred, std::span<const double> obs, double gamma,
                         std::span<double> dpred = {});
/// (1/N) sum [ln(sqrt(2 pi) sigma r) + (ln r)^2 / (2 sigma^2)], r = obs - pred
/// clamped below at kLognormalFloor.
DataTermValue data_term_lognormal(std::span<const double> pred, std::span<const double> obs, double sigma,
                                  std::span<double> dpred = {});
DataTermValue evaluate_data_term(const DataTerm& term, std::span<const double> pred, std::span<const double> obs,
                                 std::span<double> dpred = {});

// Objective assembly from components.
LossBreakdown combine_pinns(const LossComponents& c, const PinnsWeights& w, bool inverse);
LossBreakdown combine_alm_forward(const LossComponents& c, const AlmState& s);
LossBreakdown combine_alm_inverse(const LossComponents& c, const AlmState& s);
ComponentWeights sensitivities_pinns(const PinnsWeights& w, bool inverse);
ComponentWeights sensitivities_alm_forward(const LossComponents& c, const AlmState& s);
ComponentWeights sensitivities_alm_inverse(const LossComponents& c, const AlmState& s);

/// Evaluates loss components of a network on a dataset and their gradient
/// with respect to every network parameter (and the coefficients v when the
/// network carries them).
class LossEvaluator {
 public:
  LossEvaluator(const ProblemSpec& problem, const Dataset& data, DataTerm term = {});

  /// Forward pass; `with_data` adds the measurement term (inverse problems).
  LossComponents evaluate(const Network& net, bool with_data, bool training = false,
                          std::uint64_t dropout_seed = 0);

  /// Gradient of sum_k weights_k * component_k for the last evaluate() call,
  /// laid out like Network::flatten().
  std::vector<double> gradient(const ComponentWeights& weights) const;

  void set_interior(std::vector<std::pair<double, double>> interior);
  const Dataset& data() const { return data_; }

 private:
  const ProblemSpec& problem_;
  Dataset data_;
  DataTerm term_;
  std::vector<std::pair<double, double>> value_points_;
  BatchEvaluator batch_;
  const Network* net_ = nullptr;
  bool with_data_ = false;
  std::array<double, 2> v_{};
  // Cached per-point quantities of the last evaluation.
  std::vector<ResidualPartials> residuals_;
  std::vector<double> bc_err_;
  std::vector<double> ic_err_;
  std::vector<double> data_dpred_;
};

/// Coefficients entering the residual: net.coeffs() when present, otherwise
/// the problem's forward coefficients.
std::array<double, 2> residual_coeffs(const Network& net, const ProblemSpec& problem);

LossBreakdown pinns_loss(const Network& net, const ProblemSpec& problem, const Dataset& data,
                         const PinnsWeights& weights);
LossBreakdown alm_forward_loss(const Network& net, const ProblemSpec& problem, const Dataset& data,
                               const AlmState& state);
LossBreakdown alm_inverse_loss(const Network& net, const ProblemSpec& problem, const Dataset& data,
                               const AlmState& state, const DataTerm& term);

}  // namespace almpinn
