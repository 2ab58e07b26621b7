#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "wavelab/wave_solver.hpp"

namespace wavelab {

enum class Provenance { default_value, file, flag };

std::string_view to_string(Provenance p);

/// Simulation parameters plus the level ladder, with where each value came from.
struct ResolvedConfig {
  SimulationConfig sim;
  std::vector<int> levels{41, 81, 161, 321};
  std::map<std::string, Provenance> provenance;

  ResolvedConfig();
  /// Sets key (hyphenated or underscored) from text. Throws std::invalid_argument
  /// for unknown keys and values of the wrong type.
  void set(std::string_view key, std::string_view value, Provenance source);
};

/// Recognised keys: dim, order, bc, n, tf, cfl, penalty-factor, solution, levels, seed.
const std::vector<std::string>& config_keys();

/// Parses `key = value` lines ('#' starts a comment) over the defaults.
/// Throws std::invalid_argument on syntax, key or value errors.
ResolvedConfig parse_config(std::string_view text, std::string_view source_name = "<memory>");
/// Throws std::runtime_error when the file cannot be read.
ResolvedConfig load_config(const std::filesystem::path& path);

/// "41,81,161" -> {41, 81, 161}. Throws std::invalid_argument.
std::vector<int> parse_levels(std::string_view text);

/// Runs one subcommand. Returns 0 on pass, 1 when a check fails, 2 on usage errors.
int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wavelab
