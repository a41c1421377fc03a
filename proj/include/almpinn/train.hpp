#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "almpinn/error.hpp"
#include "almpinn/loss.hpp"
#include "almpinn/network.hpp"
#include "almpinn/optim.hpp"
#include "almpinn/problems.hpp"
#include "almpinn/sampling.hpp"

namespace almpinn {

enum class Method { kPinns, kAlm };
enum class Mode { kForward, kInverse };

Method parse_method(std::string_view name);
std::string to_string(Method m);
std::string to_string(Mode m);

struct SampleCounts {
  int interior = 0;
  int boundary = 0;
  int initial = 0;
};

/// 1000/1000/1000 for nl1d, 500/500/1000 for burgers.
SampleCounts default_sample_counts(ProblemId id);

std::vector<int> default_layers();  // 2, eight hidden layers of 40, 1

struct RunConfig {
  std::string problem = "nl1d";
  ProblemOptions problem_options;
  Method method = Method::kAlm;
  Mode mode = Mode::kForward;

  // Optimizer steps = epochs * batches.
  std::int64_t epochs = 1;
  std::int64_t batches = 5000;
  /// Redraw the interior points at the start of every epoch after the first.
  bool resample_interior = false;
  SamplingStrategy strategy = SamplingStrategy::kUniform;
  /// Zero entries take the problem defaults.
  SampleCounts counts;

  std::vector<int> layers = default_layers();
  double dropout = 0.0;
  std::uint64_t seed = 0;

  AlmState alm;
  PinnsWeights pinns;
  LrSchedule schedule;
  AdamConfig adam;

  // Inverse problems.
  std::vector<double> slices;  // empty: evenly spread t_num slices
  int x_num = 50;
  int t_num = 2;
  NoiseSpec noise;
  DataTerm data_term;
  std::optional<std::array<ParamBounds, 2>> v_bounds;
  std::optional<std::array<double, 2>> v_init;  // default: midpoint of the bounds
  int insert_layers = 0;
  double poi_weight = 1.0;
  double theta_lr_scale = 1.0;

  int history_every = 100;
  /// Steps before this one are not candidates for the best model.
  std::int64_t best_after = 1000;
  double divergence_limit = 1e10;

  std::int64_t iterations() const { return epochs * batches; }
  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

/// Defaults for inverse runs: the warm-started network is only fine-tuned and
/// the coefficients get a large learning rate.
RunConfig inverse_defaults();

struct HistoryRow {
  std::int64_t step = 0;
  LossBreakdown loss;
  std::array<double, 2> mu{};
  std::array<double, 2> lambda{};
  double lr = 0.0;
  bool multiplier_update = false;
};

struct RunResult {
  Network best_model;
  Network final_model;
  double best_loss = 0.0;
  double best_gover_loss = 0.0;
  std::int64_t best_step = 0;
  double best_time = 0.0;  // seconds from start to the best step
  double total_time = 0.0;
  std::int64_t steps = 0;
  std::string stop_reason;  // "budget", "gradient", "diverged"
  std::vector<HistoryRow> history;
  AlmState final_state;
  std::size_t clamped_residuals = 0;

  // Inverse runs: coefficients of the final and the best model.
  std::array<double, 2> v_final{};
  std::array<double, 2> v_best{};
  std::array<double, 2> v_rel_error{};       // from v_final
  std::array<double, 2> v_best_rel_error{};  // from v_best
};

/// Raised when the loss exceeds the divergence limit or turns non-finite.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, RunResult partial) : Error(what), partial_(std::move(partial)) {}
  const RunResult& partial() const { return partial_; }

 private:
  RunResult partial_;
};

/// One multiplier/penalty update; returns true when it fired. Forward mode
/// uses (bc_ls, ic_ls) with the shared mu[0], inverse mode (gover_loss,
/// data_ls) with mu[0] and mu[1].
bool update_multipliers(AlmState& state, const LossBreakdown& b, Mode mode);

/// The scalar rule applied to one penalty parameter.
double next_mu(const AlmState& state, double mu, double penalty);

/// Builds the training dataset for a config: forward sets plus, in inverse
/// mode, the noisy additional measurements.
Dataset build_dataset(const RunConfig& config, const ProblemSpec& problem);

RunResult train_forward(const RunConfig& config);

/// Throws CheckpointError(kDimensionMismatch) when `pretrained` does not match
/// the configured layers.
RunResult train_inverse(const RunConfig& config, const Network& pretrained);

/// history.csv: step,total,gover,bc,ic,data,penalty,mu_1,mu_2,lambda_1,lambda_2,lr
void write_history_csv(const std::vector<HistoryRow>& history, const std::filesystem::path& path);

/// Value and gradient of a scalar function of a parameter vector.
using ScalarFunction = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct EqualityProblem {
  ScalarFunction objective;
  /// Signed constraint c(x) = 0.
  ScalarFunction constraint;
};

struct AlmSolveOptions {
  int max_outer = 500;
  int max_inner = 100000;
  double inner_tol = 1e-13;
};

struct AlmSolveResult {
  std::vector<double> x;
  int outer_iterations = 0;
  AlmState state;
  double constraint = 0.0;
};

/// Outer loop of the constrained solver on an explicit problem: minimize the
/// augmented Lagrangian f + lambda c + (mu / 2) c^2 in x, then apply
/// update_multipliers with bc_ls = c. Stops when |c| <= eps.
AlmSolveResult minimize_alm(const EqualityProblem& problem, std::vector<double> x0, AlmState state,
                            const AlmSolveOptions& options = {});

}  // namespace almpinn
