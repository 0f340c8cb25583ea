#pragma once

// Experiment configuration files.
//
// Format: one `key = value` per line, '#' starts a comment. An optional
// `[grid]` section lists comma-separated values for keys to sweep over;
// cells are the Cartesian product with the first grid key outermost.
//
//   seed = 20240611
//   noise = wm
//   wm_K = 5
//   [grid]
//   alpha_lambda = 0.25, 1.5
//   alpha_sigma = 0.105, 1.5
//
// Values are normalized on read (reals in shortest round-trip form, bools as
// true/false), so canonical_text() is stable and parses back to an equal
// config. Unknown keys are rejected.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spinmarket/engine.hpp"
#include "spinmarket/stats.hpp"

namespace spinmarket::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ValueType { Integer, Unsigned, Real, Bool, Text, Choice, IntegerList };

struct KeySpec {
  std::string_view name;
  ValueType type;
  std::string_view default_value;  ///< empty: no default
  std::string_view choices;        ///< '|' separated, for ValueType::Choice
  bool sweepable;
  std::string_view help;
};

/// Every accepted key, in canonical order.
const std::vector<KeySpec>& key_specs();

struct GridAxis {
  std::string key;
  std::vector<std::string> values;  ///< normalized
  friend bool operator==(const GridAxis&, const GridAxis&) = default;
};

struct ExperimentConfig {
  std::map<std::string, std::string> values;  ///< explicitly set keys only, normalized
  std::vector<GridAxis> grid;

  /// Explicit value or documented default; nullopt when neither exists.
  std::optional<std::string> get(std::string_view key) const;
  bool has(std::string_view key) const { return values.count(std::string(key)) > 0; }

  /// Validates and normalizes `raw` for `key`, then stores it. `where` prefixes
  /// error messages (e.g. "run.cfg:12").
  void set(const std::string& key, const std::string& raw, const std::string& where);

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Throws ConfigError with "<source>:<line>: ..." messages.
ExperimentConfig parse_config(std::istream& in, const std::string& source);
ExperimentConfig load_config(const std::string& path);

/// Explicit keys in canonical order, then the grid section if any.
std::string canonical_text(const ExperimentConfig& config);

/// FNV-1a 64 over canonical_text without the `output` key, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

struct ResolvedConfig {
  RunConfig run;
  AnalysisOptions analysis;
  std::string output;
};

/// Builds engine inputs. Throws ConfigError for missing `seed` and for
/// conflicting or incomplete model settings.
ResolvedConfig resolve(const ExperimentConfig& config);

/// Analysis options and output directory only; used where the model is
/// supplied per grid cell.
AnalysisOptions resolve_analysis(const ExperimentConfig& config);

/// Applies every grid combination to copies of `config` (grid cleared) and
/// drops cells whose config_hash was already seen. Without a grid, returns
/// just the config itself.
std::vector<ExperimentConfig> expand_grid(const ExperimentConfig& config);

/// Applies `key=value` overrides (as given to --set).
void apply_override(ExperimentConfig& config, const std::string& assignment);

}  // namespace spinmarket::cli
