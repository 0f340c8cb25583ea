#include "spinmarket/market.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "spinmarket/format.hpp"

namespace spinmarket {

namespace {

void require_same_length(std::span<const Spin> prev, std::span<const Spin> next) {
  if (prev.size() != next.size()) {
    throw std::invalid_argument("snapshot length mismatch: " + std::to_string(prev.size()) +
                                " vs " + std::to_string(next.size()));
  }
}

}  // namespace

std::string to_string(PriceMode mode) {
  return mode == PriceMode::SHBaseline ? "sh_baseline" : "reinterpreted";
}

PriceMode parse_price_mode(const std::string& text) {
  if (text == "sh" || text == "sh_baseline") return PriceMode::SHBaseline;
  if (text == "reinterpreted") return PriceMode::Reinterpreted;
  throw std::invalid_argument("unknown mode '" + text + "' (expected sh_baseline or reinterpreted)");
}

std::int64_t excess_demand(std::span<const Spin> prev, std::span<const Spin> next) {
  require_same_length(prev, next);
  std::int64_t ed = 0;
  for (std::size_t i = 0; i < prev.size(); ++i) ed += next[i] - prev[i];
  return ed;
}

std::int64_t trading_volume(std::span<const Spin> prev, std::span<const Spin> next) {
  require_same_length(prev, next);
  std::int64_t v = 0;
  for (std::size_t i = 0; i < prev.size(); ++i) v += std::abs(next[i] - prev[i]);
  return v;
}

SnapshotDelta compare_snapshots(std::span<const Spin> prev, std::span<const Spin> next) {
  require_same_length(prev, next);
  SnapshotDelta delta;
  for (std::size_t i = 0; i < prev.size(); ++i) {
    const int d = next[i] - prev[i];
    delta.excess_demand += d;
    delta.volume += std::abs(d);
    if ((prev[i] == 1 && d > 0) || (prev[i] == -1 && d < 0)) ++delta.crafty_violations;
  }
  return delta;
}

double step_log_price(double prev_log_price, std::int64_t ed, std::int64_t n_agents) {
  if (n_agents <= 0) throw std::invalid_argument("step_log_price: N must be > 0");
  return prev_log_price + static_cast<double>(ed) / static_cast<double>(n_agents);
}

void MarketSeries::reserve(std::size_t rounds) {
  segment_id.reserve(rounds);
  magnetization.reserve(rounds);
  log_price.reserve(rounds);
  excess_demand.reserve(rounds);
  volume.reserve(rounds);
  gross_volume.reserve(rounds);
  spin_sum_begin.reserve(rounds);
  spin_sum_end.reserve(rounds);
}

std::vector<double> returns(std::span<const double> log_price,
                            std::span<const std::int32_t> segment_id, int tau) {
  if (log_price.size() != segment_id.size()) {
    throw std::invalid_argument("returns: log_price and segment_id lengths differ");
  }
  if (tau < 1 || static_cast<std::size_t>(tau) >= log_price.size()) {
    throw std::invalid_argument("returns: tau " + std::to_string(tau) +
                                " out of range for series of length " +
                                std::to_string(log_price.size()));
  }
  const auto lag = static_cast<std::size_t>(tau);
  std::vector<double> out;
  out.reserve(log_price.size() - lag);
  for (std::size_t t = lag; t < log_price.size(); ++t) {
    if (segment_id[t] != segment_id[t - lag]) continue;
    out.push_back(log_price[t] - log_price[t - lag]);
  }
  return out;
}

std::vector<double> returns(const MarketSeries& series, int tau) {
  return returns(series.log_price, series.segment_id, tau);
}

AlignedReturns unit_returns_with_volume(const MarketSeries& series) {
  AlignedReturns out;
  for (std::size_t t = 1; t < series.size(); ++t) {
    if (series.segment_id[t] != series.segment_id[t - 1]) continue;
    out.returns.push_back(series.log_price[t] - series.log_price[t - 1]);
    out.volume.push_back(series.volume[t]);
    out.segment_id.push_back(series.segment_id[t]);
  }
  return out;
}

void write_series_csv(std::ostream& out, const MarketSeries& series,
                      const std::string& provenance) {
  if (!provenance.empty()) out << "# " << provenance << '\n';
  out << "t,segment_id,M,log_price,ED,volume\n";
  for (std::size_t t = 0; t < series.size(); ++t) {
    out << t << ',' << series.segment_id[t] << ',' << format_real(series.magnetization[t]) << ','
        << format_real(series.log_price[t]) << ',' << series.excess_demand[t] << ','
        << series.volume[t] << '\n';
  }
}

MarketSeries read_series_csv(std::istream& in) {
  MarketSeries series;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto pos = line.find("n_agents=");
      if (pos != std::string::npos) {
        series.n_agents = std::stoll(line.substr(pos + 9));
      }
      continue;
    }
    if (!header_seen) {
      if (line != "t,segment_id,M,log_price,ED,volume") {
        throw std::runtime_error("series CSV line " + std::to_string(line_no) +
                                 ": unexpected header '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    std::string cells[6];
    std::size_t count = 0;
    std::string cell;
    while (std::getline(row, cell, ',')) {
      if (count < 6) cells[count] = cell;
      ++count;
    }
    if (count != 6) {
      throw std::runtime_error("series CSV line " + std::to_string(line_no) + ": expected 6 fields");
    }
    try {
      series.segment_id.push_back(static_cast<std::int32_t>(std::stol(cells[1])));
      series.magnetization.push_back(parse_real(cells[2]));
      series.log_price.push_back(parse_real(cells[3]));
      series.excess_demand.push_back(std::stoll(cells[4]));
      series.volume.push_back(std::stoll(cells[5]));
    } catch (const std::exception& e) {
      throw std::runtime_error("series CSV line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!header_seen) throw std::runtime_error("series CSV: missing header");
  return series;
}

}  // namespace spinmarket
