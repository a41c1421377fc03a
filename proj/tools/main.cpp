#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace almpinn;
using namespace almpinn::cli;

namespace {

void add_run_flags(CLI::App* sub, RunFlags& f) {
  sub->add_option("--problem", f.problem, "nl1d or burgers");
  sub->add_option("--method", f.method, "alm or pinns");
  sub->add_option("--config", f.config_path, "INI-style config file");
  sub->add_option("--out", f.out, "output directory")->required();
  sub->add_option("--seed", f.seed);
  sub->add_option("--epochs", f.epochs);
  sub->add_option("--batches", f.batches);
  sub->add_option("--set", f.sets, "key=value config override (repeatable)");
}

int run_guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const UnknownProblem& e) {
    std::cerr << "unknown problem: " << e.what() << '\n';
    return kUnknownProblem;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << '\n';
    return e.kind() == CheckpointError::Kind::kDimensionMismatch ? kDimensionMismatch : kIoError;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIoError;
  } catch (const DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kDiverged;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCheckFailed;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physics-informed networks trained with an augmented Lagrangian"};
  app.require_subcommand(1);

  RunFlags solve;
  CLI::App* s = app.add_subcommand("solve", "train a forward solution");
  add_run_flags(s, solve);

  RunFlags invert;
  CLI::App* inv = app.add_subcommand("invert", "recover PDE coefficients from noisy measurements");
  add_run_flags(inv, invert);
  inv->add_option("--pretrained", invert.pretrained, "forward checkpoint to warm-start from");
  inv->add_option("--noise", invert.noise, "gaussian, laplace or lognormal");
  inv->add_option("--level", invert.level, "relative noise level");
  inv->add_option("--loss", invert.loss, "data term: l2, l1 or logn");
  inv->add_option("--sigma", invert.sigma);
  inv->add_option("--gamma", invert.gamma);
  inv->add_option("--v-bounds", invert.v_bounds, "lo,hi or lo1,hi1,lo2,hi2");
  inv->add_option("--v-init", invert.v_init, "v1,v2 or 'true'");

  EvaluateFlags eval;
  CLI::App* ev = app.add_subcommand("evaluate", "score a checkpoint against the exact solution");
  ev->add_option("--checkpoint", eval.checkpoint)->required();
  ev->add_option("--problem", eval.problem);
  ev->add_option("--out", eval.out);
  ev->add_option("--nx", eval.nx)->check(CLI::PositiveNumber);
  ev->add_option("--nt", eval.nt)->check(CLI::PositiveNumber);

  SweepFlags sweep;
  CLI::App* sw = app.add_subcommand("sweep", "run a grid of inversion experiments");
  sw->add_option("--spec", sweep.spec)->required();
  sw->add_option("--out", sweep.out)->required();
  sw->add_option("--jobs", sweep.jobs)->check(CLI::PositiveNumber);

  SelftestFlags self;
  CLI::App* st = app.add_subcommand("selftest", "gradient and oracle checks");
  st->add_option("--inject-fault", self.faults, "deliberately break a component")
      ->check(CLI::IsMember({"series-truncation", "gradient-sign", "laplace-scale"}));
  st->add_option("--seeds", self.seeds)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (*s) return run_guarded([&] { return cmd_solve(solve); });
  if (*inv) return run_guarded([&] { return cmd_invert(invert); });
  if (*ev) return run_guarded([&] { return cmd_evaluate(eval); });
  if (*sw) return run_guarded([&] { return cmd_sweep(sweep); });
  return run_guarded([&] { return cmd_selftest(self); });
}
