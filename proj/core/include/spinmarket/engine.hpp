#pragma once

// Full experiments: thermalize, run analyzed rounds, detect traps, reset,
// and sweep many configurations.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spinmarket/dynamics.hpp"
#include "spinmarket/lattice.hpp"
#include "spinmarket/market.hpp"
#include "spinmarket/stats.hpp"

namespace spinmarket {

struct ResetPolicy {
  bool enabled = true;
  /// Rounds discarded after each reset before analysis resumes.
  std::int64_t rethermalization = 0;

  friend bool operator==(const ResetPolicy&, const ResetPolicy&) = default;
};

struct RunConfig {
  int n = 32;
  std::int64_t rounds = 100000;
  std::int64_t thermalization = 5000;
  std::uint64_t seed = 0;
  ModelParams model;
  PriceMode mode = PriceMode::Reinterpreted;
  ResetPolicy reset;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct RunDiagnostics {
  std::int64_t ed_identity_violations = 0;
  std::int64_t crafty_violations = 0;
  /// Trap detections during analyzed rounds (a trap on the last round is
  /// counted here but not reset).
  std::int64_t traps = 0;
  /// Resets applied while discarding (thermalization, rethermalization).
  std::int64_t discarded_resets = 0;
};

struct RunResult {
  RunConfig config;
  MarketSeries series;
  /// Analyzed round after which a reset was applied; strictly increasing.
  std::vector<std::int64_t> reset_times;
  std::vector<std::int64_t> segment_rounds;
  RunDiagnostics diagnostics;
};

/// True iff every spin is +1 or every spin is -1.
bool detect_trap(const SpinLattice& lattice) noexcept;

/// Re-randomizes the lattice uniformly over the three states.
void exogenous_reset(SpinLattice& lattice, Rng& rng);

/// Deterministic in the config. The replica's random stream is seeded with
/// derive_seed(config.seed, 0). Traps hit while discarding rounds are reset
/// too (when resets are enabled) but not recorded as segment boundaries.
RunResult run_simulation(const RunConfig& config);

struct TauSummary {
  int tau = 0;
  std::size_t n_returns = 0;
  double tail_exponent = 0.0;  ///< NaN if the fit was not possible
  double tail_std_error = 0.0;
  double excess_kurtosis = 0.0;  ///< NaN if not computable
};

struct RunSummary {
  std::int64_t resets = 0;
  std::int64_t segments = 0;
  std::int64_t traps = 0;
  std::vector<TauSummary> per_tau;
  double vol_volume_correlation = 0.0;  ///< NaN if degenerate
  RunDiagnostics diagnostics;
};

RunSummary summarize(const RunResult& result, const SeriesAnalysis& analysis);
RunSummary summarize(const RunResult& result, const AnalysisOptions& options);

struct SweepEntry {
  RunConfig config;
  std::optional<RunSummary> summary;
  std::string error;  ///< set when the cell failed
};

/// Called from worker threads with the cell index and its full result.
using SweepCallback = std::function<void(std::size_t, const RunResult&, const SeriesAnalysis&)>;

/// Runs every config independently on up to `parallelism` threads. Output
/// order follows `grid`; results do not depend on `parallelism`. A failing
/// cell (including a throwing callback) is reported in its entry and does
/// not stop the others.
std::vector<SweepEntry> run_sweep(std::span<const RunConfig> grid, const AnalysisOptions& options,
                                  int parallelism, const SweepCallback& on_result = {});

}  // namespace spinmarket
