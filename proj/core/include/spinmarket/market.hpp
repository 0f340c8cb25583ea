#pragma once

// Price formation from round-boundary spin snapshots.
//
// d_i(t) = s_i(t) - s_i(t-1) is agent i's demand (negative: supply), the excess
// demand is ED(t) = sum_i d_i(t), and the log-price moves by ED(t) / N per
// round. Across a round that is exactly the change in magnetization, so within
// a segment r_tau(t) = M(t) - M(t - tau). The SH baseline instead reads the
// log-price directly as M(t).

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "spinmarket/lattice.hpp"

namespace spinmarket {

enum class PriceMode { SHBaseline, Reinterpreted };

std::string to_string(PriceMode mode);
/// Accepts "sh", "sh_baseline", "reinterpreted". Throws std::invalid_argument.
PriceMode parse_price_mode(const std::string& text);

struct SnapshotDelta {
  std::int64_t excess_demand = 0;
  std::int64_t volume = 0;
  /// Agents with s(t-1) = +1 and d > 0, or s(t-1) = -1 and d < 0.
  std::int64_t crafty_violations = 0;
};

/// Throws std::invalid_argument on length mismatch.
std::int64_t excess_demand(std::span<const Spin> prev, std::span<const Spin> next);
std::int64_t trading_volume(std::span<const Spin> prev, std::span<const Spin> next);
SnapshotDelta compare_snapshots(std::span<const Spin> prev, std::span<const Spin> next);

/// prev + ED / N. Throws std::invalid_argument for N <= 0.
double step_log_price(double prev_log_price, std::int64_t excess_demand, std::int64_t n_agents);

/// ln P = M for P proportional to exp(M) with unit constant.
constexpr double sh_log_price(double magnetization) noexcept { return magnetization; }

/// Per-round market record for one run. Entry t describes analyzed round t.
struct MarketSeries {
  std::int64_t n_agents = 0;
  std::vector<std::int32_t> segment_id;
  std::vector<double> magnetization;  ///< end of round
  std::vector<double> log_price;
  std::vector<std::int64_t> excess_demand;
  std::vector<std::int64_t> volume;
  std::vector<std::int64_t> gross_volume;  ///< per-drawing changes, diagnostic only
  std::vector<std::int64_t> spin_sum_begin;
  std::vector<std::int64_t> spin_sum_end;

  std::size_t size() const noexcept { return magnetization.size(); }
  void reserve(std::size_t rounds);
};

/// r_tau(t) = log_price(t) - log_price(t - tau) for every t >= tau whose
/// window lies in one segment. Throws std::invalid_argument for tau < 1 or
/// tau >= series length.
std::vector<double> returns(std::span<const double> log_price,
                            std::span<const std::int32_t> segment_id, int tau);
std::vector<double> returns(const MarketSeries& series, int tau);

/// One-round returns aligned with that round's volume (segment starts dropped).
struct AlignedReturns {
  std::vector<double> returns;
  std::vector<std::int64_t> volume;
  std::vector<std::int32_t> segment_id;
};
AlignedReturns unit_returns_with_volume(const MarketSeries& series);

/// CSV columns: t,segment_id,M,log_price,ED,volume. `provenance` is written
/// as a leading '# ...' comment line when non-empty.
void write_series_csv(std::ostream& out, const MarketSeries& series,
                      const std::string& provenance = {});
/// Reads the CSV written above; '#' lines are skipped except a
/// 'n_agents=<int>' token, which fills MarketSeries::n_agents. Throws
/// std::runtime_error with a line number on malformed input.
MarketSeries read_series_csv(std::istream& in);

}  // namespace spinmarket
