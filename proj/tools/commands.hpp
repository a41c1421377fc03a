#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "almpinn/config.hpp"
#include "almpinn/train.hpp"

namespace almpinn::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kUsage = 2,
  kConfigError = 3,
  kUnknownProblem = 4,
  kIoError = 5,
  kDimensionMismatch = 6,
  kDiverged = 7,
};

/// Thrown for flag combinations the parser cannot reject by itself.
struct UsageError : Error {
  using Error::Error;
};

struct RunFlags {
  std::optional<std::string> problem;
  std::optional<std::string> method;
  std::optional<std::string> config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> epochs;
  std::optional<std::int64_t> batches;
  std::vector<std::string> sets;  // key=value overrides

  // invert only
  std::optional<std::string> pretrained;
  std::optional<std::string> noise;
  std::optional<double> level;
  std::optional<std::string> loss;
  std::optional<double> sigma;
  std::optional<double> gamma;
  std::optional<std::string> v_bounds;
  std::optional<std::string> v_init;
};

struct EvaluateFlags {
  std::string checkpoint;
  std::optional<std::string> problem;
  std::string out;
  int nx = 100;
  int nt = 100;
};

struct SweepFlags {
  std::string spec;
  std::string out;
  int jobs = 1;
};

struct SelftestFlags {
  std::vector<std::string> faults;
  int seeds = 10;
};

/// Merges defaults, the config file, --set entries and flags, in that order.
RunConfig assemble_config(const RunFlags& flags, Mode mode);

int cmd_solve(const RunFlags& flags);
int cmd_invert(const RunFlags& flags);
int cmd_evaluate(const EvaluateFlags& flags);
int cmd_sweep(const SweepFlags& flags);
int cmd_selftest(const SelftestFlags& flags);

/// Creates `dir` and checks it accepts files; throws IoError otherwise.
void prepare_output_dir(const std::filesystem::path& dir);

/// run.json, history.csv, best.ckpt, final.ckpt, metrics.csv, surface.csv.
void write_run_artifacts(const std::filesystem::path& dir, const std::string& command, const RunConfig& config,
                         const RunResult& result);

}  // namespace almpinn::cli
