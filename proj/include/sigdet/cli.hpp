#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sigdet/sequence_model.hpp"

namespace sigdet::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,            // bad flags or unknown subcommand
  kMissingConfig = 2,    // config file not found or unreadable
  kInvalidConfig = 3,    // config or override violates the schema
  kSolverFailure = 4,    // domain or numerical failure in the library
  kResourceLimit = 5,    // support or lattice cap exceeded
};

/// Flat view of a config file: "section.key" -> raw text value.
using ConfigMap = std::map<std::string, std::string>;

/// Every key the config schema knows, with its default ("" = no default).
const ConfigMap& schema_defaults();

/// Reads an INI file with sections [problem], [spectrum], [smoothness],
/// [experiment] and [rates]. Unknown sections or keys raise ConfigError.
/// Throws std::ios_base::failure when the file cannot be opened.
ConfigMap load_config(const std::string& path);

/// Applies "section.key=value" overrides; the key must exist in the schema.
void apply_overrides(ConfigMap& config, const std::vector<std::string>& overrides);

/// Builds the problem part of a config (defaults filled from the schema).
ProblemConfig problem_from(const ConfigMap& config);

/// Parses a whitespace- or comma-separated list of reals. `field` names the
/// key in error messages.
std::vector<double> parse_list(std::string_view text, const std::string& field);

/// 64-bit FNV-1a over the canonical "key=value\n" serialization of every
/// non-empty entry, in key order, as 16 hex digits.
std::string config_hash(const ConfigMap& config);

/// Version string compiled into the library.
std::string_view version();

/// Runs one CLI invocation. `args` excludes the program name. Results go to
/// `--output` when given, else `out`; diagnostics go to `err` as one line.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sigdet::cli
