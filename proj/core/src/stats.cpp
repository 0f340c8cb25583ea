#include "spinmarket/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "spinmarket/format.hpp"

namespace spinmarket {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_segments(std::span<const double> values, std::span<const std::int32_t> segment_id,
                    int max_lag, const char* who) {
  if (values.size() != segment_id.size()) {
    throw std::invalid_argument(std::string(who) + ": values and segment ids differ in length");
  }
  if (max_lag < 1) throw std::invalid_argument(std::string(who) + ": max_lag must be >= 1");
  if (values.size() <= static_cast<std::size_t>(max_lag)) {
    throw std::invalid_argument(std::string(who) + ": series length must exceed max_lag");
  }
}

// Linear-interpolated quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

void write_provenance(std::ostream& out, const std::string& provenance) {
  if (!provenance.empty()) out << "# " << provenance << '\n';
}

}  // namespace

double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean: empty input");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double standard_deviation(std::span<const double> values) {
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

std::vector<double> rescale_by_std(std::span<const double> values) {
  const double s = standard_deviation(values);
  if (!(s > 0.0)) throw std::domain_error("rescale_by_std: zero variance");
  std::vector<double> out(values.begin(), values.end());
  for (auto& v : out) v /= s;
  return out;
}

double Histogram::density(std::size_t k) const {
  const double width = edges[k + 1] - edges[k];
  return total > 0 ? static_cast<double>(counts[k]) / (static_cast<double>(total) * width) : 0.0;
}

Histogram make_histogram(std::span<const double> values, int bins, int tau, double rescale_std) {
  if (bins < 1) throw std::invalid_argument("make_histogram: bins must be >= 1");
  if (values.empty()) throw std::invalid_argument("make_histogram: empty input");
  double extent = 0.0;
  for (double v : values) extent = std::max(extent, std::abs(v));
  if (!(extent > 0.0)) throw std::domain_error("make_histogram: all values are zero");

  Histogram h;
  h.tau = tau;
  h.rescale_std = rescale_std;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  const double width = 2.0 * extent / bins;
  for (int k = 0; k <= bins; ++k) h.edges[k] = -extent + width * k;
  h.edges.back() = extent;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    auto k = static_cast<std::int64_t>(std::floor((v + extent) / width));
    k = std::clamp<std::int64_t>(k, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(k)];
  }
  h.total = static_cast<std::int64_t>(values.size());
  return h;
}

void write_histogram_csv(std::ostream& out, const Histogram& h, const std::string& provenance) {
  write_provenance(out, provenance);
  out << "bin_center,density,tau,rescale_std\n";
  for (std::size_t k = 0; k < h.bins(); ++k) {
    out << format_real(h.center(k)) << ',' << format_real(h.density(k)) << ',' << h.tau << ','
        << format_real(h.rescale_std) << '\n';
  }
}

TailFit tail_exponent(std::span<const double> samples, double x_min, std::size_t min_samples,
                      std::size_t min_ccdf_count) {
  if (!(x_min > 0.0)) throw std::invalid_argument("tail_exponent: x_min must be > 0");
  std::vector<double> tail;
  for (double v : samples) {
    const double a = std::abs(v);
    if (a >= x_min) tail.push_back(a);
  }
  if (tail.size() < std::max<std::size_t>(min_samples, 2)) {
    throw std::domain_error("tail_exponent: " + std::to_string(tail.size()) +
                            " samples above x_min, need " + std::to_string(min_samples));
  }
  std::sort(tail.begin(), tail.end());

  double log_sum = 0.0;
  for (double a : tail) log_sum += std::log(a / x_min);
  if (!(log_sum > 0.0)) throw std::domain_error("tail_exponent: all tail samples equal x_min");

  TailFit fit;
  const auto k = static_cast<double>(tail.size());
  const double tail_index = k / log_sum;
  fit.exponent = 1.0 + tail_index;
  fit.std_error = tail_index / std::sqrt(k);
  fit.x_min = x_min;
  fit.x_max = tail.back();
  fit.n_tail = tail.size();

  // CCDF regression. Evaluating between distinct values keeps the estimate
  // exact for spike (lattice) distributions such as WM.
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < tail.size();) {
    std::size_t j = i;
    while (j < tail.size() && tail[j] == tail[i]) ++j;
    if (j == tail.size()) break;
    const std::size_t beyond = tail.size() - j;
    if (beyond < min_ccdf_count) break;
    xs.push_back(0.5 * (std::log(tail[i]) + std::log(tail[j])));
    ys.push_back(std::log(static_cast<double>(beyond)));
    i = j;
  }
  fit.regression_points = xs.size();
  if (xs.size() >= 2) {
    const double mx = mean(xs);
    const double my = mean(ys);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    fit.regression_exponent = sxx > 0.0 ? 1.0 - sxy / sxx : kNaN;
  } else {
    fit.regression_exponent = kNaN;
  }
  return fit;
}

std::vector<double> autocorrelation(std::span<const double> values,
                                    std::span<const std::int32_t> segment_id, int max_lag) {
  check_segments(values, segment_id, max_lag, "autocorrelation");
  const double m = mean(values);
  bool constant = true;
  for (double v : values) {
    if (v != values.front()) {
      constant = false;
      break;
    }
  }
  if (constant) throw std::domain_error("autocorrelation: constant series");

  std::vector<double> ac(static_cast<std::size_t>(max_lag) + 1, kNaN);
  ac[0] = 1.0;
  for (std::size_t lag = 1; lag <= static_cast<std::size_t>(max_lag); ++lag) {
    double cross = 0.0;
    double second = 0.0;
    std::size_t pairs = 0;
    for (std::size_t t = 0; t + lag < values.size(); ++t) {
      if (segment_id[t] != segment_id[t + lag]) continue;
      const double a = values[t] - m;
      const double b = values[t + lag] - m;
      cross += a * b;
      second += 0.5 * (a * a + b * b);
      ++pairs;
    }
    if (pairs > 0 && second > 0.0) ac[lag] = cross / second;
  }
  return ac;
}

std::vector<double> autocorrelation(std::span<const double> values, int max_lag) {
  const std::vector<std::int32_t> one_segment(values.size(), 0);
  return autocorrelation(values, one_segment, max_lag);
}

std::vector<double> variogram(std::span<const double> values,
                              std::span<const std::int32_t> segment_id, int max_lag) {
  check_segments(values, segment_id, max_lag, "variogram");
  std::vector<double> v(static_cast<std::size_t>(max_lag) + 1, kNaN);
  v[0] = 0.0;
  for (std::size_t lag = 1; lag <= static_cast<std::size_t>(max_lag); ++lag) {
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t t = 0; t + lag < values.size(); ++t) {
      if (segment_id[t] != segment_id[t + lag]) continue;
      const double d = values[t + lag] - values[t];
      sum += d * d;
      ++pairs;
    }
    if (pairs > 0) v[lag] = sum / static_cast<double>(pairs);
  }
  return v;
}

std::vector<double> variogram(std::span<const double> values, int max_lag) {
  const std::vector<std::int32_t> one_segment(values.size(), 0);
  return variogram(values, one_segment, max_lag);
}

void write_lag_csv(std::ostream& out, std::span<const double> values,
                   const std::string& provenance) {
  write_provenance(out, provenance);
  out << "lag,value\n";
  for (std::size_t lag = 0; lag < values.size(); ++lag) {
    out << lag << ',' << format_real(values[lag]) << '\n';
  }
}

double excess_kurtosis(std::span<const double> samples) {
  if (samples.size() < 4) throw std::domain_error("excess_kurtosis: need at least 4 samples");
  const double m = mean(samples);
  double m2 = 0.0;
  double m4 = 0.0;
  for (double v : samples) {
    const double d2 = (v - m) * (v - m);
    m2 += d2;
    m4 += d2 * d2;
  }
  const auto n = static_cast<double>(samples.size());
  m2 /= n;
  m4 /= n;
  if (!(m2 > 0.0)) throw std::domain_error("excess_kurtosis: zero variance");
  return m4 / (m2 * m2) - 3.0;
}

double vol_volume_correlation(std::span<const double> returns,
                              std::span<const std::int64_t> volume) {
  if (returns.size() != volume.size()) {
    throw std::invalid_argument("vol_volume_correlation: length mismatch");
  }
  if (returns.size() < 2) throw std::domain_error("vol_volume_correlation: need >= 2 rounds");
  const auto n = static_cast<double>(returns.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < returns.size(); ++i) {
    mx += std::abs(returns[i]);
    my += static_cast<double>(volume[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < returns.size(); ++i) {
    const double dx = std::abs(returns[i]) - mx;
    const double dy = static_cast<double>(volume[i]) - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    throw std::domain_error("vol_volume_correlation: constant volatility or volume");
  }
  return sxy / std::sqrt(sxx * syy);
}

GaussianFit fit_gaussian_central(std::span<const double> samples) {
  if (samples.size() < 4) throw std::domain_error("fit_gaussian_central: need at least 4 samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  if (!(iqr > 0.0)) throw std::domain_error("fit_gaussian_central: zero interquartile range");
  // IQR of N(0, 1) is 2 * 0.6744897501960817.
  return {quantile_sorted(sorted, 0.5), iqr / 1.3489795003921634};
}

double gaussian_abs_ccdf(const GaussianFit& fit, double x) {
  const double a = std::abs(x);
  const double inv = 1.0 / (fit.sigma * std::sqrt(2.0));
  return 0.5 * std::erfc((a - fit.mean) * inv) + 0.5 * std::erfc((a + fit.mean) * inv);
}

double empirical_abs_ccdf(std::span<const double> samples, double x) {
  if (samples.empty()) return 0.0;
  const double a = std::abs(x);
  const auto hits = std::count_if(samples.begin(), samples.end(),
                                  [a](double v) { return std::abs(v) >= a; });
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

SeriesAnalysis analyze_series(const MarketSeries& series, const AnalysisOptions& options,
                              bool keep_rescaled) {
  SeriesAnalysis out;
  for (int tau : options.taus) {
    TauAnalysis ta;
    ta.tau = tau;
    try {
      const auto r = returns(series, tau);
      ta.n_returns = r.size();
      if (r.size() < 4) throw std::domain_error("fewer than 4 returns");
      ta.stddev = standard_deviation(r);
      auto rescaled = rescale_by_std(r);
      ta.excess_kurtosis = excess_kurtosis(rescaled);
      ta.histogram = make_histogram(rescaled, options.histogram_bins, tau, ta.stddev);
      try {
        ta.tail = tail_exponent(rescaled, options.tail_xmin_multiple, options.min_tail_samples);
      } catch (const std::domain_error& e) {
        ta.error = e.what();
      }
      if (keep_rescaled) ta.rescaled = std::move(rescaled);
    } catch (const std::exception& e) {
      ta.error = e.what();
    }
    out.per_tau.push_back(std::move(ta));
  }

  const auto aligned = unit_returns_with_volume(series);
  try {
    out.return_acf = autocorrelation(aligned.returns, aligned.segment_id, options.max_lag);
    std::vector<double> magnitudes(aligned.returns.size());
    std::transform(aligned.returns.begin(), aligned.returns.end(), magnitudes.begin(),
                   [](double r) { return std::abs(r); });
    out.abs_return_acf = autocorrelation(magnitudes, aligned.segment_id, options.max_lag);
    out.variogram = variogram(aligned.returns, aligned.segment_id, options.max_lag);
  } catch (const std::exception& e) {
    out.warnings.push_back(std::string("autocorrelation: ") + e.what());
  }
  try {
    out.vol_volume_correlation = vol_volume_correlation(aligned.returns, aligned.volume);
  } catch (const std::exception& e) {
    out.warnings.push_back(std::string("volume correlation: ") + e.what());
  }
  return out;
}

}  // namespace spinmarket
