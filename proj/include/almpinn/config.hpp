#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "almpinn/train.hpp"

namespace almpinn {

/// Flat, ordered key-value view of a configuration. Section headers prefix
/// the keys below them, so
///
///     [alm]
///     mu = 2
///
/// and `alm.mu = 2` are the same entry. `#` and `;` start comments.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(std::string_view text);
/// Throws ConfigError when the file cannot be read or parsed.
ConfigMap load_config_file(const std::filesystem::path& path);

/// Applies every entry to `config`. Unknown keys and malformed values throw
/// ConfigError naming the key.
void apply_config(const ConfigMap& entries, RunConfig& config);

/// Every effective setting of `config` as key-value text, in the same key
/// space apply_config accepts.
ConfigMap effective_config(const RunConfig& config);

/// Keys apply_config understands.
const std::vector<std::string>& known_config_keys();

// Value parsers shared with the command line.
std::vector<double> parse_real_list(std::string_view text);
std::vector<int> parse_layers(std::string_view text);
std::array<ParamBounds, 2> parse_bounds(std::string_view text);

}  // namespace almpinn
