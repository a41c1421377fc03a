#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "almpinn/format.hpp"
#include "almpinn/metrics.hpp"

namespace almpinn::cli {
namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

void apply_sets(const std::vector<std::string>& sets, ConfigMap& entries) {
  for (const std::string& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + s + "'");
    const ConfigMap one = parse_config_text(s);
    entries.insert_or_assign(one.begin()->first, one.begin()->second);
  }
}

ordered_json to_json(const ConfigMap& m) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, v] : m) j[k] = v;
  return j;
}

ordered_json to_json(const ErrorReport& r) {
  return {{"eps_r", r.eps_r}, {"eps_inf", r.eps_inf}, {"eps_a", r.eps_a}, {"nx", r.nx}, {"nt", r.nt}};
}

ordered_json pair_json(const std::array<double, 2>& a) { return ordered_json::array({a[0], a[1]}); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

CheckpointMeta checkpoint_meta(const RunConfig& config, const RunResult& result, std::int64_t iteration) {
  CheckpointMeta meta;
  meta.problem_id = config.problem;
  meta.iteration = iteration;
  const std::size_t n = result.history.size();
  for (std::size_t i = n > 10 ? n - 10 : 0; i < n; ++i) meta.loss_history_tail.push_back(result.history[i].loss.total);
  return meta;
}

std::string median_string(std::vector<double> v) {
  if (v.empty()) return "";
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return format_double(n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]));
}

}  // namespace

RunConfig assemble_config(const RunFlags& flags, Mode mode) {
  RunConfig config = mode == Mode::kInverse ? inverse_defaults() : RunConfig{};
  ConfigMap entries;
  if (flags.config_path) entries = load_config_file(*flags.config_path);
  apply_sets(flags.sets, entries);
  apply_config(entries, config);

  if (flags.problem) config.problem = *flags.problem;
  if (flags.method) config.method = parse_method(*flags.method);
  if (flags.seed) config.seed = *flags.seed;
  if (flags.epochs) config.epochs = *flags.epochs;
  if (flags.batches) config.batches = *flags.batches;
  if (flags.noise) {
    ConfigMap m{{"noise.distribution", *flags.noise}};
    apply_config(m, config);
  }
  if (flags.level) config.noise.level = *flags.level;
  if (flags.loss) {
    ConfigMap m{{"loss.data_term", *flags.loss}};
    apply_config(m, config);
  }
  if (flags.sigma) {
    if (config.data_term.kind == DataTermKind::kLaplace) throw UsageError("--sigma does not apply to the laplace term");
    config.data_term.param = *flags.sigma;
  }
  if (flags.gamma) {
    if (config.data_term.kind != DataTermKind::kLaplace) throw UsageError("--gamma applies to the laplace term only");
    config.data_term.param = *flags.gamma;
  }
  if (flags.v_bounds) config.v_bounds = parse_bounds(*flags.v_bounds);

  // Resolves the problem id early so unknown ids fail before any output.
  const ProblemSpec problem = make_problem(config.problem, config.problem_options);
  if (flags.v_init) {
    if (*flags.v_init == "true") {
      config.v_init = problem.true_v;
    } else {
      ConfigMap m{{"inverse.v_init", *flags.v_init}};
      apply_config(m, config);
    }
  }
  if (mode == Mode::kInverse && !config.v_bounds) {
    throw UsageError("invert needs v bounds (--v-bounds or optim.v_bounds)");
  }
  config.validate();
  return config;
}

void prepare_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  const fs::path probe = dir / ".write-probe";
  {
    std::ofstream out(probe);
    if (!out) throw IoError("output directory " + dir.string() + " is not writable");
  }
  fs::remove(probe, ec);
}

void write_run_artifacts(const fs::path& dir, const std::string& command, const RunConfig& config,
                         const RunResult& result) {
  const ProblemSpec problem = make_problem(config.problem, config.problem_options);
  const GridEvaluation best = evaluate_on_grid(result.best_model, problem);
  const GridEvaluation last = evaluate_on_grid(result.final_model, problem);

  save_checkpoint(result.best_model, checkpoint_meta(config, result, result.best_step), dir / "best.ckpt");
  save_checkpoint(result.final_model, checkpoint_meta(config, result, result.steps), dir / "final.ckpt");
  write_history_csv(result.history, dir / "history.csv");
  write_metrics_csv(best.report, dir / "metrics.csv");
  write_surface_csv(best, dir / "surface.csv");

  ordered_json j;
  j["command"] = command;
  j["problem"] = config.problem;
  j["method"] = to_string(config.method);
  j["mode"] = to_string(config.mode);
  j["config"] = to_json(effective_config(config));
  j["metrics"] = to_json(best.report);
  j["final_metrics"] = to_json(last.report);
  j["best_loss"] = result.best_loss;
  j["best_gover_loss"] = result.best_gover_loss;
  j["best_step"] = result.best_step;
  j["steps"] = result.steps;
  j["stop_reason"] = result.stop_reason;
  j["multipliers"] = {{"lambda", pair_json(result.final_state.lambda)}, {"mu", pair_json(result.final_state.mu)}};
  if (config.mode == Mode::kInverse) {
    j["inverse"] = {
        {"data_term", to_string(config.data_term.kind)},
        {"data_term_param", config.data_term.param},
        {"noise", to_string(config.noise.distribution)},
        {"noise_level", config.noise.level},
        {"v_true", pair_json(problem.true_v)},
        {"v", pair_json(result.v_final)},
        {"error_v", pair_json(result.v_rel_error)},
        {"v_best", pair_json(result.v_best)},
        {"error_v_best", pair_json(result.v_best_rel_error)},
        {"clamped_residuals", result.clamped_residuals},
    };
  }
  j["timing"] = {{"best_time_s", result.best_time}, {"total_time_s", result.total_time}};
  write_text(dir / "run.json", j.dump(2) + "\n");
}

int cmd_solve(const RunFlags& flags) {
  const RunConfig config = assemble_config(flags, Mode::kForward);
  prepare_output_dir(flags.out);
  try {
    const RunResult r = train_forward(config);
    write_run_artifacts(flags.out, "solve", config, r);
    std::cout << "solve " << config.problem << ' ' << to_string(config.method) << ": " << r.steps
              << " steps, best gover_loss " << format_double(r.best_gover_loss) << '\n';
    return kOk;
  } catch (const DivergenceError& e) {
    write_history_csv(e.partial().history, fs::path(flags.out) / "history.csv");
    throw;
  }
}

int cmd_invert(const RunFlags& flags) {
  if (!flags.pretrained) throw UsageError("invert needs --pretrained");
  const RunConfig config = assemble_config(flags, Mode::kInverse);
  const LoadedCheckpoint ckpt = load_checkpoint(*flags.pretrained, config.layers);
  prepare_output_dir(flags.out);
  try {
    const RunResult r = train_inverse(config, ckpt.net);
    write_run_artifacts(flags.out, "invert", config, r);
    std::cout << "invert " << config.problem << ' ' << to_string(config.method) << ": v = ("
              << format_double(r.v_final[0]) << ", " << format_double(r.v_final[1]) << "), relative errors ("
              << format_double(r.v_rel_error[0]) << ", " << format_double(r.v_rel_error[1]) << ")\n";
    return kOk;
  } catch (const DivergenceError& e) {
    write_history_csv(e.partial().history, fs::path(flags.out) / "history.csv");
    throw;
  }
}

int cmd_evaluate(const EvaluateFlags& flags) {
  const LoadedCheckpoint ckpt = load_checkpoint(flags.checkpoint);
  const std::string id = flags.problem ? *flags.problem : ckpt.meta.problem_id;
  if (id.empty()) throw UsageError("checkpoint names no problem; pass --problem");
  const ProblemSpec problem = make_problem(id);
  const GridEvaluation g = evaluate_on_grid(ckpt.net, problem, flags.nx, flags.nt);
  if (!flags.out.empty()) {
    prepare_output_dir(flags.out);
    write_metrics_csv(g.report, fs::path(flags.out) / "metrics.csv");
    write_surface_csv(g, fs::path(flags.out) / "surface.csv");
  }
  std::cout << "eps_r " << format_double(g.report.eps_r) << "\neps_inf " << format_double(g.report.eps_inf)
            << "\neps_a " << format_double(g.report.eps_a) << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------
// sweep

namespace {

struct SweepCell {
  std::string noise;
  double level = 0.0;
  std::string loss;
  std::string method;
};

struct SweepRow {
  std::size_t cell = 0;
  std::uint64_t seed = 0;
  std::array<double, 2> v{};
  std::array<double, 2> err{};
  std::string status;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text + ",") {
    if (c == ',') {
      const auto b = cur.find_first_not_of(" \t");
      if (b != std::string::npos) out.push_back(cur.substr(b, cur.find_last_not_of(" \t") - b + 1));
      cur.clear();
    } else {
      cur += c;
    }
  }
  return out;
}

}  // namespace

int cmd_sweep(const SweepFlags& flags) {
  if (flags.jobs < 1) throw UsageError("--jobs must be positive");
  ConfigMap entries = load_config_file(flags.spec);
  auto take = [&](const std::string& key) {
    const auto it = entries.find(key);
    if (it == entries.end()) return std::string();
    std::string v = it->second;
    entries.erase(it);
    return v;
  };
  const auto noises = split_list(take("sweep.noise"));
  const auto level_text = split_list(take("sweep.levels"));
  const auto losses = split_list(take("sweep.losses"));
  const auto methods = split_list(take("sweep.methods"));
  const std::string seeds_text = take("sweep.seeds");
  const std::string base_text = take("sweep.seed_base");
  const fs::path spec_dir = fs::path(flags.spec).parent_path();
  std::map<std::string, fs::path> pretrained;
  for (const std::string m : {"alm", "pinns"}) {
    std::string p = take("sweep.pretrained." + m);
    if (p.empty()) p = entries.count("sweep.pretrained") ? entries.at("sweep.pretrained") : "";
    if (!p.empty()) pretrained[m] = fs::path(p).is_absolute() ? fs::path(p) : spec_dir / p;
  }
  take("sweep.pretrained");
  for (const auto& [k, v] : entries) {
    if (k.rfind("sweep.", 0) == 0) throw ConfigError("unknown sweep key '" + k + "'");
  }

  int seeds = 1;
  std::uint64_t seed_base = 0;
  try {
    if (!seeds_text.empty()) seeds = std::stoi(seeds_text);
    if (!base_text.empty()) seed_base = std::stoull(base_text);
  } catch (const std::exception&) {
    throw ConfigError("sweep.seeds and sweep.seed_base must be integers");
  }
  if (seeds < 1) throw ConfigError("sweep.seeds must be positive");

  std::vector<SweepCell> cells;
  for (const auto& n : noises) {
    for (const auto& l : level_text) {
      for (const auto& loss : losses) {
        for (const auto& m : methods) {
          double level = 0.0;
          try {
            level = std::stod(l);
          } catch (const std::exception&) {
            throw ConfigError("bad noise level '" + l + "'");
          }
          cells.push_back({n, level, loss, m});
        }
      }
    }
  }

  // Validate every cell before running any of them.
  std::vector<RunConfig> configs;
  std::vector<std::uint64_t> seeds_of;
  for (int r = 0; r < seeds; ++r) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      RunConfig cfg = inverse_defaults();
      apply_config(entries, cfg);
      ConfigMap cell{{"noise.distribution", cells[c].noise}, {"loss.data_term", cells[c].loss},
                     {"method", cells[c].method}};
      apply_config(cell, cfg);
      cfg.noise.level = cells[c].level;
      cfg.seed = seed_base + c + static_cast<std::uint64_t>(r) * cells.size();
      if (!cfg.v_bounds) throw UsageError("sweep needs optim.v_bounds");
      if (!pretrained.count(to_string(cfg.method))) {
        throw ConfigError("sweep needs sweep.pretrained or sweep.pretrained." + to_string(cfg.method));
      }
      make_problem(cfg.problem, cfg.problem_options);
      cfg.validate();
      configs.push_back(cfg);
      seeds_of.push_back(cfg.seed);
    }
  }

  prepare_output_dir(flags.out);
  std::vector<SweepRow> rows(configs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      const RunConfig& cfg = configs[i];
      SweepRow& row = rows[i];
      row.cell = i % cells.size();
      row.seed = seeds_of[i];
      try {
        const auto ckpt = load_checkpoint(pretrained.at(to_string(cfg.method)), cfg.layers);
        const RunResult r = train_inverse(cfg, ckpt.net);
        const fs::path dir =
            fs::path(flags.out) / ("cell" + std::to_string(row.cell) + "_seed" + std::to_string(row.seed));
        prepare_output_dir(dir);
        write_run_artifacts(dir, "sweep", cfg, r);
        row.v = r.v_final;
        row.err = r.v_rel_error;
        row.status = "ok";
      } catch (const std::exception& e) {
        row.status = std::string("failed: ") + e.what();
        std::replace(row.status.begin(), row.status.end(), ',', ';');
        std::replace(row.status.begin(), row.status.end(), '\n', ' ');
      }
      std::lock_guard lock(log_mutex);
      std::cerr << "sweep: cell " << row.cell << " seed " << row.seed << ' ' << row.status << '\n';
    }
  };
  std::vector<std::thread> pool;
  const int n_threads = std::min<int>(flags.jobs, static_cast<int>(std::max<std::size_t>(1, configs.size())));
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << "cell,noise,level,loss,method,seed,v_1,v_2,error_v_1,error_v_2,status\n";
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const SweepCell& cell = cells[c];
    const std::string prefix = std::to_string(c) + ',' + cell.noise + ',' + format_double(cell.level) + ',' +
                               cell.loss + ',' + cell.method + ',';
    std::vector<double> v1, v2, e1, e2;
    for (const SweepRow& row : rows) {
      if (row.cell != c) continue;
      csv << prefix << row.seed << ',';
      if (row.status == "ok") {
        csv << format_double(row.v[0]) << ',' << format_double(row.v[1]) << ',' << format_double(row.err[0]) << ','
            << format_double(row.err[1]);
        v1.push_back(row.v[0]);
        v2.push_back(row.v[1]);
        e1.push_back(row.err[0]);
        e2.push_back(row.err[1]);
      } else {
        csv << ",,,";
      }
      csv << ',' << row.status << '\n';
    }
    csv << prefix << "median," << median_string(v1) << ',' << median_string(v2) << ',' << median_string(e1) << ','
        << median_string(e2) << ',' << (e1.empty() ? "no successful runs" : "ok") << '\n';
  }
  write_text(fs::path(flags.out) / "sweep_summary.csv", csv.str());
  std::cout << "sweep: " << cells.size() << " cells, " << rows.size() << " runs\n";
  return kOk;
}

}  // namespace almpinn::cli
