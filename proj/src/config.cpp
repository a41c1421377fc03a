#include "almpinn/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "almpinn/format.hpp"

namespace almpinn {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_real(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

template <class Int>
Int to_integer(std::string_view s) {
  s = trim(s);
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("expected an integer, got '" + std::string(s) + "'");
  }
  return v;
}

bool to_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("expected a boolean, got '" + std::string(s) + "'");
}

std::array<double, 2> to_pair(std::string_view s) {
  const auto v = parse_real_list(s);
  if (v.size() != 2) throw ConfigError("expected two numbers, got '" + std::string(s) + "'");
  return {v[0], v[1]};
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(v[i]);
    } else {
      out += std::to_string(v[i]);
    }
  }
  return out;
}

std::string join2(const std::array<double, 2>& a) { return format_double(a[0]) + ',' + format_double(a[1]); }

struct Handler {
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

using Table = std::vector<std::pair<std::string, Handler>>;

const Table& table() {
  static const Table t = [] {
    Table h;
    auto add = [&](std::string key, Handler handler) { h.emplace_back(std::move(key), std::move(handler)); };
    add("problem", {[](RunConfig& c, std::string_view v) { c.problem = std::string(v); },
                    [](const RunConfig& c) { return c.problem; }});
    add("method", {[](RunConfig& c, std::string_view v) { c.method = parse_method(v); },
                   [](const RunConfig& c) { return to_string(c.method); }});
    add("seed", {[](RunConfig& c, std::string_view v) { c.seed = to_integer<std::uint64_t>(v); },
                 [](const RunConfig& c) { return std::to_string(c.seed); }});
    add("problem.nu", {[](RunConfig& c, std::string_view v) { c.problem_options.nu = to_real(v); },
                       [](const RunConfig& c) { return format_double(c.problem_options.nu); }});
    add("problem.series_terms",
        {[](RunConfig& c, std::string_view v) { c.problem_options.series_terms = to_integer<int>(v); },
         [](const RunConfig& c) { return std::to_string(c.problem_options.series_terms); }});
    add("problem.quad_points",
        {[](RunConfig& c, std::string_view v) { c.problem_options.quad_points = to_integer<int>(v); },
         [](const RunConfig& c) { return std::to_string(c.problem_options.quad_points); }});
    add("network.layers", {[](RunConfig& c, std::string_view v) { c.layers = parse_layers(v); },
                           [](const RunConfig& c) { return join(c.layers); }});
    add("network.dropout", {[](RunConfig& c, std::string_view v) { c.dropout = to_real(v); },
                            [](const RunConfig& c) { return format_double(c.dropout); }});
    add("train.epochs", {[](RunConfig& c, std::string_view v) { c.epochs = to_integer<std::int64_t>(v); },
                         [](const RunConfig& c) { return std::to_string(c.epochs); }});
    add("train.batches", {[](RunConfig& c, std::string_view v) { c.batches = to_integer<std::int64_t>(v); },
                          [](const RunConfig& c) { return std::to_string(c.batches); }});
    add("train.resample_interior", {[](RunConfig& c, std::string_view v) { c.resample_interior = to_bool(v); },
                                    [](const RunConfig& c) { return std::string(c.resample_interior ? "true" : "false"); }});
    add("train.history_every", {[](RunConfig& c, std::string_view v) { c.history_every = to_integer<int>(v); },
                                [](const RunConfig& c) { return std::to_string(c.history_every); }});
    add("train.best_after", {[](RunConfig& c, std::string_view v) { c.best_after = to_integer<std::int64_t>(v); },
                             [](const RunConfig& c) { return std::to_string(c.best_after); }});
    add("train.divergence_limit", {[](RunConfig& c, std::string_view v) { c.divergence_limit = to_real(v); },
                                   [](const RunConfig& c) { return format_double(c.divergence_limit); }});
    add("sampling.n_interior", {[](RunConfig& c, std::string_view v) { c.counts.interior = to_integer<int>(v); },
                                [](const RunConfig& c) { return std::to_string(c.counts.interior); }});
    add("sampling.n_boundary", {[](RunConfig& c, std::string_view v) { c.counts.boundary = to_integer<int>(v); },
                                [](const RunConfig& c) { return std::to_string(c.counts.boundary); }});
    add("sampling.n_initial", {[](RunConfig& c, std::string_view v) { c.counts.initial = to_integer<int>(v); },
                               [](const RunConfig& c) { return std::to_string(c.counts.initial); }});
    add("sampling.strategy",
        {[](RunConfig& c, std::string_view v) {
           if (v == "uniform") {
             c.strategy = SamplingStrategy::kUniform;
           } else if (v == "grid") {
             c.strategy = SamplingStrategy::kGrid;
           } else {
             throw ConfigError("expected uniform or grid");
           }
         },
         [](const RunConfig& c) { return std::string(c.strategy == SamplingStrategy::kGrid ? "grid" : "uniform"); }});
    add("alm.lambda", {[](RunConfig& c, std::string_view v) { c.alm.lambda = to_pair(v); },
                       [](const RunConfig& c) { return join2(c.alm.lambda); }});
    add("alm.mu",
        {[](RunConfig& c, std::string_view v) {
           const auto m = parse_real_list(v);
           if (m.size() == 1) {
             c.alm.mu = {m[0], m[0]};
           } else if (m.size() == 2) {
             c.alm.mu = {m[0], m[1]};
           } else {
             throw ConfigError("expected one or two numbers");
           }
         },
         [](const RunConfig& c) { return join2(c.alm.mu); }});
    add("alm.mu_max", {[](RunConfig& c, std::string_view v) { c.alm.mu_max = to_real(v); },
                       [](const RunConfig& c) { return format_double(c.alm.mu_max); }});
    add("alm.eps", {[](RunConfig& c, std::string_view v) { c.alm.eps = to_real(v); },
                    [](const RunConfig& c) { return format_double(c.alm.eps); }});
    add("alm.delta", {[](RunConfig& c, std::string_view v) { c.alm.delta = to_real(v); },
                      [](const RunConfig& c) { return format_double(c.alm.delta); }});
    add("alm.mu_rule", {[](RunConfig& c, std::string_view v) { c.alm.rule = parse_mu_rule(v); },
                        [](const RunConfig& c) { return to_string(c.alm.rule); }});
    add("alm.growth", {[](RunConfig& c, std::string_view v) { c.alm.growth = to_real(v); },
                       [](const RunConfig& c) { return format_double(c.alm.growth); }});
    add("pinns.weights",
        {[](RunConfig& c, std::string_view v) {
           const auto w = parse_real_list(v);
           if (w.size() != 3 && w.size() != 4) throw ConfigError("expected gover,bc,ic[,data] weights");
           for (double x : w) {
             if (x < 0.0) throw ConfigError("weights must be non-negative");
           }
           c.pinns = {w[0], w[1], w[2], w.size() == 4 ? w[3] : 1.0};
         },
         [](const RunConfig& c) {
           return join(std::vector<double>{c.pinns.gover, c.pinns.bc, c.pinns.ic, c.pinns.data});
         }});
    add("optim.lr_boundaries",
        {[](RunConfig& c, std::string_view v) {
           c.schedule.boundaries.clear();
           if (!trim(v).empty()) {
             for (auto p : split(v, ',')) c.schedule.boundaries.push_back(to_integer<std::int64_t>(p));
           }
         },
         [](const RunConfig& c) { return join(c.schedule.boundaries); }});
    add("optim.lr_values", {[](RunConfig& c, std::string_view v) { c.schedule.values = parse_real_list(v); },
                            [](const RunConfig& c) { return join(c.schedule.values); }});
    add("optim.beta1", {[](RunConfig& c, std::string_view v) { c.adam.beta1 = to_real(v); },
                        [](const RunConfig& c) { return format_double(c.adam.beta1); }});
    add("optim.beta2", {[](RunConfig& c, std::string_view v) { c.adam.beta2 = to_real(v); },
                        [](const RunConfig& c) { return format_double(c.adam.beta2); }});
    add("optim.adam_eps", {[](RunConfig& c, std::string_view v) { c.adam.eps = to_real(v); },
                           [](const RunConfig& c) { return format_double(c.adam.eps); }});
    add("optim.v_bounds", {[](RunConfig& c, std::string_view v) { c.v_bounds = parse_bounds(v); },
                           [](const RunConfig& c) {
                             if (!c.v_bounds) return std::string();
                             const auto& b = *c.v_bounds;
                             return join(std::vector<double>{b[0].lo, b[0].hi, b[1].lo, b[1].hi});
                           }});
    add("optim.poi_weight", {[](RunConfig& c, std::string_view v) { c.poi_weight = to_real(v); },
                             [](const RunConfig& c) { return format_double(c.poi_weight); }});
    add("optim.theta_lr_scale", {[](RunConfig& c, std::string_view v) { c.theta_lr_scale = to_real(v); },
                                 [](const RunConfig& c) { return format_double(c.theta_lr_scale); }});
    add("loss.data_term",
        {[](RunConfig& c, std::string_view v) {
           const DataTermKind kind = parse_data_term(v);
           if (kind != c.data_term.kind) c.data_term = DataTerm::standard(kind);
         },
         [](const RunConfig& c) { return to_string(c.data_term.kind); }});
    add("loss.sigma", {[](RunConfig& c, std::string_view v) {
                         if (c.data_term.kind == DataTermKind::kLaplace) return;
                         c.data_term.param = to_real(v);
                       },
                       [](const RunConfig& c) {
                         return c.data_term.kind == DataTermKind::kLaplace ? std::string()
                                                                           : format_double(c.data_term.param);
                       }});
    add("loss.gamma", {[](RunConfig& c, std::string_view v) {
                         if (c.data_term.kind != DataTermKind::kLaplace) return;
                         c.data_term.param = to_real(v);
                       },
                       [](const RunConfig& c) {
                         return c.data_term.kind == DataTermKind::kLaplace ? format_double(c.data_term.param)
                                                                           : std::string();
                       }});
    add("noise.distribution",
        {[](RunConfig& c, std::string_view v) {
           try {
             c.noise.distribution = parse_noise_distribution(v);
           } catch (const InvalidArgument& e) {
             throw ConfigError(e.what());
           }
         },
         [](const RunConfig& c) { return to_string(c.noise.distribution); }});
    add("noise.level", {[](RunConfig& c, std::string_view v) { c.noise.level = to_real(v); },
                        [](const RunConfig& c) { return format_double(c.noise.level); }});
    add("noise.seed", {[](RunConfig& c, std::string_view v) { c.noise.seed = to_integer<std::uint64_t>(v); },
                       [](const RunConfig& c) { return std::to_string(c.noise.seed); }});
    add("inverse.slices", {[](RunConfig& c, std::string_view v) {
                             c.slices = trim(v).empty() ? std::vector<double>{} : parse_real_list(v);
                           },
                           [](const RunConfig& c) { return join(c.slices); }});
    add("inverse.x_num", {[](RunConfig& c, std::string_view v) { c.x_num = to_integer<int>(v); },
                          [](const RunConfig& c) { return std::to_string(c.x_num); }});
    add("inverse.t_num", {[](RunConfig& c, std::string_view v) { c.t_num = to_integer<int>(v); },
                          [](const RunConfig& c) { return std::to_string(c.t_num); }});
    add("inverse.v_init", {[](RunConfig& c, std::string_view v) { c.v_init = to_pair(v); },
                           [](const RunConfig& c) { return c.v_init ? join2(*c.v_init) : std::string(); }});
    add("inverse.insert_layers", {[](RunConfig& c, std::string_view v) { c.insert_layers = to_integer<int>(v); },
                                  [](const RunConfig& c) { return std::to_string(c.insert_layers); }});
    return h;
  }();
  return t;
}

}  // namespace

std::vector<double> parse_real_list(std::string_view text) {
  std::vector<double> out;
  for (auto p : split(text, ',')) out.push_back(to_real(p));
  return out;
}

std::vector<int> parse_layers(std::string_view text) {
  text = trim(text);
  // "8x40" is shorthand for eight hidden layers of width 40.
  if (const auto x = text.find('x'); x != std::string_view::npos) {
    const int depth = to_integer<int>(text.substr(0, x));
    const int width = to_integer<int>(text.substr(x + 1));
    if (depth < 0 || width < 1) throw ConfigError("bad layer shorthand '" + std::string(text) + "'");
    std::vector<int> l{2};
    l.insert(l.end(), static_cast<std::size_t>(depth), width);
    l.push_back(1);
    return l;
  }
  std::vector<int> l;
  for (auto p : split(text, ',')) l.push_back(to_integer<int>(p));
  if (l.size() < 2 || l.front() != 2 || l.back() != 1) {
    throw ConfigError("layers must start with 2 and end with 1, got '" + std::string(text) + "'");
  }
  for (int w : l) {
    if (w < 1) throw ConfigError("layer widths must be positive");
  }
  return l;
}

std::array<ParamBounds, 2> parse_bounds(std::string_view text) {
  const auto v = parse_real_list(text);
  std::array<ParamBounds, 2> b{};
  if (v.size() == 2) {
    b = {ParamBounds{v[0], v[1]}, ParamBounds{v[0], v[1]}};
  } else if (v.size() == 4) {
    b = {ParamBounds{v[0], v[1]}, ParamBounds{v[2], v[3]}};
  } else {
    throw ConfigError("v bounds take lo,hi or lo1,hi1,lo2,hi2");
  }
  for (const auto& p : b) {
    if (!(p.lo < p.hi)) throw ConfigError("v bounds need lo < hi");
  }
  return b;
}

ConfigMap parse_config_text(std::string_view text) {
  ConfigMap out;
  std::string section;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": unterminated section");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    out[section.empty() ? key : section + "." + key] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

ConfigMap load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void apply_config(const ConfigMap& entries, RunConfig& config) {
  const Table& t = table();
  // "loss.data_term" resets the scale, so it goes before sigma/gamma.
  auto apply_one = [&](const std::string& key, const std::string& value) {
    const auto it = std::find_if(t.begin(), t.end(), [&](const auto& e) { return e.first == key; });
    if (it == t.end()) throw ConfigError("unknown config key '" + key + "'");
    try {
      it->second.set(config, value);
    } catch (const ConfigError& e) {
      throw ConfigError(key + ": " + e.what());
    } catch (const Error& e) {
      throw ConfigError(key + ": " + e.what());
    }
  };
  if (const auto dt = entries.find("loss.data_term"); dt != entries.end()) apply_one(dt->first, dt->second);
  for (const auto& [key, value] : entries) {
    if (key != "loss.data_term") apply_one(key, value);
  }
}

ConfigMap effective_config(const RunConfig& config) {
  ConfigMap out;
  for (const auto& [key, h] : table()) {
    std::string v = h.get(config);
    if (!v.empty()) out[key] = std::move(v);
  }
  return out;
}

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& e : table()) k.push_back(e.first);
    return k;
  }();
  return keys;
}

}  // namespace almpinn
