#include "almpinn/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "almpinn/format.hpp"
#include "almpinn/rng.hpp"

namespace almpinn {
namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kDropoutStream = 0xd20f;
constexpr std::uint64_t kResampleStream = 0x4e5a;
constexpr std::uint64_t kNoiseStream = 0x401;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::array<double, 2> coeff_array(const Network& net) {
  if (net.coeffs().size() != 2) return {0.0, 0.0};
  return {net.coeffs()[0], net.coeffs()[1]};
}

std::array<double, 2> relative_errors(const std::array<double, 2>& v, const std::array<double, 2>& truth) {
  return {std::abs(v[0] - truth[0]) / std::abs(truth[0]), std::abs(v[1] - truth[1]) / std::abs(truth[1])};
}

// Shared loop of the forward and inverse procedures.
RunResult run_loop(const RunConfig& config, const ProblemSpec& problem, Network net, const Dataset& data) {
  const bool inverse = config.mode == Mode::kInverse;
  const bool alm = config.method == Method::kAlm;
  const auto t0 = Clock::now();

  LossEvaluator evaluator(problem, data, config.data_term);
  AlmState state = config.alm;
  if (alm) state.validate();

  std::vector<double> params = net.flatten();
  AdamState adam(params.size());
  std::vector<double> lr_scale;
  if (config.theta_lr_scale != 1.0 || (inverse && config.poi_weight != 1.0)) {
    lr_scale.assign(params.size(), config.theta_lr_scale);
    for (std::size_t i = net.theta_count(); i < params.size(); ++i) lr_scale[i] = config.poi_weight;
  }
  std::array<ParamBounds, 2> bounds{};
  if (inverse) bounds = *config.v_bounds;

  RunResult result;
  result.best_gover_loss = std::numeric_limits<double>::infinity();
  result.best_model = net;
  result.stop_reason = "budget";

  const bool training = net.dropout_rate() > 0.0;
  const std::int64_t steps = config.iterations();
  for (std::int64_t step = 0; step <= steps; ++step) {
    const bool final_eval = step == steps;
    if (config.resample_interior && step > 0 && !final_eval && step % config.batches == 0) {
      evaluator.set_interior(sample_interior(problem, static_cast<int>(data.interior.size()),
                                             CounterRng::derive(config.seed, kResampleStream + step / config.batches),
                                             config.strategy));
    }
    const LossComponents comps =
        evaluator.evaluate(net, inverse, training && !final_eval, CounterRng::derive(config.seed, kDropoutStream + step));
    result.clamped_residuals = comps.clamped;
    LossBreakdown b;
    ComponentWeights w;
    if (!alm) {
      b = combine_pinns(comps, config.pinns, inverse);
      w = sensitivities_pinns(config.pinns, inverse);
    } else if (inverse) {
      b = combine_alm_inverse(comps, state);
      w = sensitivities_alm_inverse(comps, state);
    } else {
      b = combine_alm_forward(comps, state);
      w = sensitivities_alm_forward(comps, state);
    }
    const double lr = lr_at(config.schedule, std::min(step, steps > 0 ? steps - 1 : 0));

    if (!std::isfinite(b.total) || b.total > config.divergence_limit) {
      result.final_model = net;
      result.final_state = state;
      result.steps = step;
      result.stop_reason = "diverged";
      result.total_time = seconds_since(t0);
      result.history.push_back({step, b, state.mu, state.lambda, lr, false});
      throw DivergenceError("training diverged at step " + std::to_string(step) + " (loss " +
                                format_double(b.total) + ")",
                            std::move(result));
    }

    if (step >= std::min(config.best_after, steps) && b.gover_loss < result.best_gover_loss) {
      result.best_gover_loss = b.gover_loss;
      result.best_loss = b.total;
      result.best_model = net;
      result.best_step = step;
      result.best_time = seconds_since(t0);
    }

    if (final_eval) {
      result.history.push_back({step, b, state.mu, state.lambda, lr, false});
      result.steps = step;
      break;
    }

    const std::vector<double> grad = evaluator.gradient(w);
    if (l2_norm(grad) <= state.delta) {
      result.history.push_back({step, b, state.mu, state.lambda, lr, false});
      result.steps = step;
      result.stop_reason = "gradient";
      break;
    }
    adam_step(params, grad, adam, lr, config.adam, lr_scale);
    if (inverse) clip_params(params, bounds);
    net.assign(params);

    // The row keeps the multipliers this step's loss was built with.
    HistoryRow row{step, b, state.mu, state.lambda, lr, false};
    row.multiplier_update = alm && update_multipliers(state, b, config.mode);
    if (row.multiplier_update || step % config.history_every == 0) result.history.push_back(row);
  }

  result.final_model = std::move(net);
  result.final_state = state;
  result.total_time = seconds_since(t0);
  if (inverse) {
    result.v_final = coeff_array(result.final_model);
    result.v_best = coeff_array(result.best_model);
    result.v_rel_error = relative_errors(result.v_final, problem.true_v);
    result.v_best_rel_error = relative_errors(result.v_best, problem.true_v);
  }
  return result;
}

}  // namespace

Method parse_method(std::string_view name) {
  if (name == "alm") return Method::kAlm;
  if (name == "pinns") return Method::kPinns;
  throw ConfigError("unknown method '" + std::string(name) + "' (expected alm or pinns)");
}

std::string to_string(Method m) { return m == Method::kAlm ? "alm" : "pinns"; }
std::string to_string(Mode m) { return m == Mode::kForward ? "forward" : "inverse"; }

SampleCounts default_sample_counts(ProblemId id) {
  if (id == ProblemId::kNl1d) return {1000, 1000, 1000};
  return {500, 500, 1000};
}

std::vector<int> default_layers() {
  std::vector<int> l{2};
  l.insert(l.end(), 8, 40);
  l.push_back(1);
  return l;
}

void RunConfig::validate() const {
  if (epochs < 0 || batches < 0) throw ConfigError("epochs and batches must be non-negative");
  if (batches == 0 && epochs > 0) throw ConfigError("batches must be positive");
  if (counts.interior < 0 || counts.boundary < 0 || counts.initial < 0) throw ConfigError("negative sample count");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (history_every < 1) throw ConfigError("history interval must be positive");
  if (best_after < 0) throw ConfigError("best_after must be non-negative");
  if (!(poi_weight >= 0.0) || !(theta_lr_scale >= 0.0)) throw ConfigError("learning-rate scales must be non-negative");
  try {
    schedule.validate();
    if (method == Method::kAlm) alm.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (mode == Mode::kInverse) {
    if (!v_bounds) throw ConfigError("inverse runs require v bounds");
    for (const ParamBounds& b : *v_bounds) {
      if (!(b.lo < b.hi)) throw ConfigError("v bounds need lo < hi");
    }
    if (v_init) {
      for (std::size_t k = 0; k < 2; ++k) {
        if ((*v_init)[k] < (*v_bounds)[k].lo || (*v_init)[k] > (*v_bounds)[k].hi) {
          throw ConfigError("initial v lies outside its bounds");
        }
      }
    }
    if (x_num < 1) throw ConfigError("x_num must be positive");
    if (slices.empty() && t_num < 1) throw ConfigError("t_num must be positive");
    if (!(noise.level >= 0.0)) throw ConfigError("noise level must be non-negative");
    if (!(data_term.param > 0.0)) throw ConfigError("data-term scale must be positive");
    if (insert_layers < 0) throw ConfigError("insert_layers must be non-negative");
  }
}

double next_mu(const AlmState& s, double mu, double penalty) {
  switch (s.rule) {
    case MuRule::kProduct: return std::min(penalty * mu, s.mu_max);
    case MuRule::kNonShrinking: return std::min(std::max(penalty, 1.0) * mu, s.mu_max);
    case MuRule::kGrowth: return std::min(s.growth * mu, s.mu_max);
  }
  return mu;
}

bool update_multipliers(AlmState& s, const LossBreakdown& b, Mode mode) {
  if (!(std::sqrt(b.penalty) > s.eps)) return false;
  if (mode == Mode::kForward) {
    const double mu = next_mu(s, s.mu[0], b.penalty);
    s.mu = {mu, mu};
    s.lambda[0] += mu * b.bc_ls;
    s.lambda[1] += mu * b.ic_ls;
  } else {
    s.mu[0] = next_mu(s, s.mu[0], b.penalty);
    s.mu[1] = next_mu(s, s.mu[1], b.penalty);
    s.lambda[0] += s.mu[0] * b.gover_loss;
    s.lambda[1] += s.mu[1] * b.data_ls;
  }
  return true;
}

Dataset build_dataset(const RunConfig& config, const ProblemSpec& problem) {
  const SampleCounts defaults = default_sample_counts(problem.id);
  const int nf = config.counts.interior > 0 ? config.counts.interior : defaults.interior;
  const int nb = config.counts.boundary > 0 ? config.counts.boundary : defaults.boundary;
  const int ni = config.counts.initial > 0 ? config.counts.initial : defaults.initial;
  Dataset data = sample_sets(problem, nf, nb, ni, config.seed, config.strategy);
  if (config.mode == Mode::kInverse) {
    const std::vector<double> slices = config.slices.empty() ? default_slices(problem, config.t_num) : config.slices;
    const auto clean = sample_additional(problem, slices, config.x_num, config.seed);
    NoiseSpec noise = config.noise;
    noise.seed = CounterRng::derive(config.seed, kNoiseStream + config.noise.seed);
    attach_measurements(data, clean, noise);
  }
  return data;
}

RunConfig inverse_defaults() {
  RunConfig c;
  c.mode = Mode::kInverse;
  c.theta_lr_scale = 1e-4;
  c.poi_weight = 100.0;
  return c;
}

RunResult train_forward(const RunConfig& config) {
  if (config.mode != Mode::kForward) throw ConfigError("train_forward needs a forward config");
  config.validate();
  const ProblemSpec problem = make_problem(config.problem, config.problem_options);
  const Dataset data = build_dataset(config, problem);
  Network net = init_network(config.layers, config.seed, problem.domain);
  net.set_dropout_rate(config.dropout);
  return run_loop(config, problem, std::move(net), data);
}

RunResult train_inverse(const RunConfig& config, const Network& pretrained) {
  if (config.mode != Mode::kInverse) throw ConfigError("train_inverse needs an inverse config");
  config.validate();
  if (pretrained.layer_sizes() != config.layers) {
    throw CheckpointError(CheckpointError::Kind::kDimensionMismatch,
                          "pretrained network does not match the configured architecture");
  }
  const ProblemSpec problem = make_problem(config.problem, config.problem_options);
  const Dataset data = build_dataset(config, problem);

  Network net = pretrained;
  net.insert_identity_layers(config.insert_layers);
  net.set_dropout_rate(config.dropout);
  const auto& b = *config.v_bounds;
  const std::array<double, 2> v0 =
      config.v_init ? *config.v_init
                    : std::array<double, 2>{0.5 * (b[0].lo + b[0].hi), 0.5 * (b[1].lo + b[1].hi)};
  net.set_coeffs({v0[0], v0[1]});
  return run_loop(config, problem, std::move(net), data);
}

void write_history_csv(const std::vector<HistoryRow>& history, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "step,total,gover,bc,ic,data,penalty,mu_1,mu_2,lambda_1,lambda_2,lr\n";
  for (const HistoryRow& r : history) {
    out << r.step;
    for (double v : {r.loss.total, r.loss.gover_loss, r.loss.bc_ls, r.loss.ic_ls, r.loss.data_ls, r.loss.penalty,
                     r.mu[0], r.mu[1], r.lambda[0], r.lambda[1], r.lr}) {
      out << ',' << format_double(v);
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

namespace {

// Gradient descent with Armijo backtracking on a smooth function.
void minimize_smooth(const ScalarFunction& f, std::vector<double>& x, int max_iter, double tol) {
  std::vector<double> g(x.size()), trial(x.size()), gt(x.size());
  double fx = f(x, g);
  double step = 1.0;
  for (int it = 0; it < max_iter; ++it) {
    const double gn2 = [&] {
      double s = 0.0;
      for (double e : g) s += e * e;
      return s;
    }();
    if (std::sqrt(gn2) <= tol) return;
    step = std::min(1.0, step * 4.0);
    for (;;) {
      for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] - step * g[i];
      const double ft = f(trial, gt);
      if (ft <= fx - 0.5 * step * gn2 || step < 1e-20) {
        x.swap(trial);
        g.swap(gt);
        fx = ft;
        break;
      }
      step *= 0.5;
    }
  }
}

}  // namespace

AlmSolveResult minimize_alm(const EqualityProblem& problem, std::vector<double> x0, AlmState state,
                            const AlmSolveOptions& options) {
  state.validate();
  AlmSolveResult r;
  r.x = std::move(x0);
  std::vector<double> gf(r.x.size()), gc(r.x.size());
  for (r.outer_iterations = 0; r.outer_iterations < options.max_outer;) {
    const ScalarFunction lagrangian = [&](std::span<const double> x, std::span<double> g) {
      const double f = problem.objective(x, gf);
      const double c = problem.constraint(x, gc);
      const double k = state.lambda[0] + state.mu[0] * c;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = gf[i] + k * gc[i];
      return f + state.lambda[0] * c + 0.5 * state.mu[0] * c * c;
    };
    minimize_smooth(lagrangian, r.x, options.max_inner, options.inner_tol);
    ++r.outer_iterations;

    LossBreakdown b;
    b.gover_loss = problem.objective(r.x, gf);
    b.bc_ls = problem.constraint(r.x, gc);
    b.penalty = b.bc_ls * b.bc_ls;
    r.constraint = b.bc_ls;
    if (!update_multipliers(state, b, Mode::kForward)) break;
  }
  r.state = state;
  return r;
}

}  // namespace almpinn
