#include "spinmarket/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <thread>

namespace spinmarket {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

void RunConfig::validate() const {
  if (n < 3) throw std::invalid_argument("n: lattice side must be >= 3");
  if (rounds < 1) throw std::invalid_argument("rounds: must be >= 1");
  if (thermalization < 0) throw std::invalid_argument("thermalization: must be >= 0");
  if (reset.rethermalization < 0) throw std::invalid_argument("rethermalization: must be >= 0");
  model.validate();
}

bool detect_trap(const SpinLattice& lattice) noexcept {
  const auto sum = lattice.spin_sum();
  return static_cast<std::size_t>(sum < 0 ? -sum : sum) == lattice.size();
}

void exogenous_reset(SpinLattice& lattice, Rng& rng) { lattice.randomize(rng); }

RunResult run_simulation(const RunConfig& config) {
  config.validate();

  RunResult result;
  result.config = config;
  auto& series = result.series;
  auto& diag = result.diagnostics;

  Rng rng(derive_seed(config.seed, 0));
  SpinLattice lattice(config.n);
  lattice.randomize(rng);
  RoundRunner runner(config.model);

  const auto discard = [&](std::int64_t count) {
    for (std::int64_t r = 0; r < count; ++r) {
      runner.run_round(lattice, lattice.magnetization(), rng);
      if (config.reset.enabled && detect_trap(lattice)) {
        exogenous_reset(lattice, rng);
        ++diag.discarded_resets;
      }
    }
  };
  discard(config.thermalization);

  const auto n_agents = static_cast<std::int64_t>(lattice.size());
  series.n_agents = n_agents;
  series.reserve(static_cast<std::size_t>(config.rounds));

  std::vector<Spin> begin(lattice.size());
  double log_price = 0.0;
  std::int32_t segment = 0;
  std::int64_t segment_length = 0;

  for (std::int64_t t = 0; t < config.rounds; ++t) {
    std::copy(lattice.spins().begin(), lattice.spins().end(), begin.begin());
    const std::int64_t sum_begin = lattice.spin_sum();

    RoundTally tally;
    const double m = runner.run_round(lattice, lattice.magnetization(), rng, &tally);

    const auto delta = compare_snapshots(begin, lattice.spins());
    const std::int64_t sum_end = lattice.spin_sum();
    if (delta.excess_demand != sum_end - sum_begin) ++diag.ed_identity_violations;
    diag.crafty_violations += delta.crafty_violations;

    log_price = config.mode == PriceMode::Reinterpreted
                    ? step_log_price(log_price, delta.excess_demand, n_agents)
                    : sh_log_price(m);

    series.segment_id.push_back(segment);
    series.magnetization.push_back(m);
    series.log_price.push_back(log_price);
    series.excess_demand.push_back(delta.excess_demand);
    series.volume.push_back(delta.volume);
    series.gross_volume.push_back(tally.gross_changes);
    series.spin_sum_begin.push_back(sum_begin);
    series.spin_sum_end.push_back(sum_end);
    ++segment_length;

    if (config.reset.enabled && detect_trap(lattice)) {
      ++diag.traps;
      if (t + 1 < config.rounds) {
        result.reset_times.push_back(t);
        result.segment_rounds.push_back(segment_length);
        segment_length = 0;
        ++segment;
        exogenous_reset(lattice, rng);
        discard(config.reset.rethermalization);
      }
    }
  }
  result.segment_rounds.push_back(segment_length);
  return result;
}

RunSummary summarize(const RunResult& result, const SeriesAnalysis& analysis) {
  RunSummary s;
  s.resets = static_cast<std::int64_t>(result.reset_times.size());
  s.segments = static_cast<std::int64_t>(result.segment_rounds.size());
  s.traps = result.diagnostics.traps;
  s.diagnostics = result.diagnostics;
  for (const auto& ta : analysis.per_tau) {
    TauSummary ts;
    ts.tau = ta.tau;
    ts.n_returns = ta.n_returns;
    ts.tail_exponent = ta.tail ? ta.tail->exponent : kNaN;
    ts.tail_std_error = ta.tail ? ta.tail->std_error : kNaN;
    ts.excess_kurtosis = ta.histogram ? ta.excess_kurtosis : kNaN;
    s.per_tau.push_back(ts);
  }
  s.vol_volume_correlation = analysis.vol_volume_correlation.value_or(kNaN);
  return s;
}

RunSummary summarize(const RunResult& result, const AnalysisOptions& options) {
  return summarize(result, analyze_series(result.series, options));
}

std::vector<SweepEntry> run_sweep(std::span<const RunConfig> grid, const AnalysisOptions& options,
                                  int parallelism, const SweepCallback& on_result) {
  if (grid.empty()) throw std::invalid_argument("run_sweep: empty grid");
  if (parallelism < 1) throw std::invalid_argument("run_sweep: parallelism must be >= 1");

  std::vector<SweepEntry> entries(grid.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      auto& entry = entries[i];
      entry.config = grid[i];
      try {
        const auto result = run_simulation(grid[i]);
        const auto analysis = analyze_series(result.series, options);
        if (on_result) on_result(i, result, analysis);
        entry.summary = summarize(result, analysis);
      } catch (const std::exception& e) {
        entry.error = e.what();
      }
    }
  };

  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(parallelism), grid.size());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
  }
  return entries;
}

}  // namespace spinmarket
