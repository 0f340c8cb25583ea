#pragma once

// Return statistics: rescaled histograms, tail exponents, autocorrelation,
// variograms, kurtosis, volume-volatility correlation.
//
// Functions taking a `segment_id` span only pair values that share a segment;
// pairs straddling a reset never contribute.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spinmarket/market.hpp"

namespace spinmarket {

double mean(std::span<const double> values);
/// Population standard deviation (divides by n). Throws on empty input.
double standard_deviation(std::span<const double> values);

/// values / std(values). Throws std::domain_error for zero variance and
/// std::invalid_argument for empty input.
std::vector<double> rescale_by_std(std::span<const double> values);

struct Histogram {
  std::vector<double> edges;  ///< bins + 1 strictly increasing edges
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;
  int tau = 0;
  double rescale_std = 1.0;

  std::size_t bins() const noexcept { return counts.size(); }
  double center(std::size_t k) const { return 0.5 * (edges[k] + edges[k + 1]); }
  /// count / (total * width), so the density integrates to one.
  double density(std::size_t k) const;
};

/// Uniform bins over [-max|v|, +max|v|].
Histogram make_histogram(std::span<const double> values, int bins, int tau = 0,
                         double rescale_std = 1.0);

/// CSV columns: bin_center,density,tau,rescale_std.
void write_histogram_csv(std::ostream& out, const Histogram& h, const std::string& provenance = {});

struct TailFit {
  double exponent = 0.0;  ///< density exponent from the Hill estimator
  double std_error = 0.0; ///< asymptotic standard error of `exponent`
  double x_min = 0.0;
  double x_max = 0.0;
  std::size_t n_tail = 0;
  std::string method = "hill";
  /// Density exponent from log-log CCDF regression at geometric midpoints
  /// between consecutive distinct tail values (NaN if too few points).
  double regression_exponent = 0.0;
  std::size_t regression_points = 0;
};

/// Fits the tail of |samples| above x_min. Throws std::domain_error when fewer
/// than `min_samples` values reach x_min or all of them sit exactly at x_min.
/// CCDF points backed by fewer than `min_ccdf_count` samples are left out of
/// the regression.
TailFit tail_exponent(std::span<const double> samples, double x_min,
                      std::size_t min_samples = 100, std::size_t min_ccdf_count = 10);

/// Normalized autocorrelation at lags 0..max_lag (entry 0 is 1).
///
/// AC(l) = sum (x_t - m)(x_{t+l} - m) / sum ((x_t - m)^2 + (x_{t+l} - m)^2) / 2
/// over same-segment pairs, with m the overall mean. Normalizing by the
/// pair-averaged second moment makes V(l) = 2 Var_l (1 - AC(l)) hold exactly,
/// where Var_l is that second moment. Lags with no pairs yield NaN.
/// Throws std::invalid_argument if length <= max_lag, std::domain_error if
/// the series is constant.
std::vector<double> autocorrelation(std::span<const double> values,
                                    std::span<const std::int32_t> segment_id, int max_lag);
std::vector<double> autocorrelation(std::span<const double> values, int max_lag);

/// V(l) = mean (x_{t+l} - x_t)^2 over same-segment pairs, lags 0..max_lag.
std::vector<double> variogram(std::span<const double> values,
                              std::span<const std::int32_t> segment_id, int max_lag);
std::vector<double> variogram(std::span<const double> values, int max_lag);

/// CSV columns: lag,value.
void write_lag_csv(std::ostream& out, std::span<const double> values,
                   const std::string& provenance = {});

/// m4 / m2^2 - 3 with population moments. Throws std::domain_error for fewer
/// than 4 samples or zero variance.
double excess_kurtosis(std::span<const double> samples);

/// Pearson correlation of |returns| with volume. Throws std::invalid_argument
/// on length mismatch, std::domain_error when either side is constant.
double vol_volume_correlation(std::span<const double> returns, std::span<const std::int64_t> volume);

struct GaussianFit {
  double mean = 0.0;
  double sigma = 1.0;
};

/// Normal law fitted to the central part: median and IQR / 1.349.
GaussianFit fit_gaussian_central(std::span<const double> samples);
/// P(|X| >= x) under the fit.
double gaussian_abs_ccdf(const GaussianFit& fit, double x);
/// Fraction of samples with |v| >= x.
double empirical_abs_ccdf(std::span<const double> samples, double x);

struct AnalysisOptions {
  std::vector<int> taus{1, 4, 16, 64, 256};
  int max_lag = 100;
  int histogram_bins = 101;
  /// Tail threshold in units of the rescaled standard deviation.
  double tail_xmin_multiple = 2.0;
  std::size_t min_tail_samples = 100;
};

struct TauAnalysis {
  int tau = 0;
  std::size_t n_returns = 0;
  double stddev = 0.0;
  double excess_kurtosis = 0.0;
  std::optional<TailFit> tail;
  std::optional<Histogram> histogram;
  std::vector<double> rescaled;
  std::string error;  ///< why tail/kurtosis/histogram are missing, if they are
};

struct SeriesAnalysis {
  std::vector<TauAnalysis> per_tau;
  std::vector<double> return_acf;
  std::vector<double> abs_return_acf;
  std::vector<double> variogram;
  std::optional<double> vol_volume_correlation;
  std::vector<std::string> warnings;
};

/// Runs every statistic on one series. Per-statistic failures (too few
/// returns, zero variance) are recorded rather than thrown.
SeriesAnalysis analyze_series(const MarketSeries& series, const AnalysisOptions& options,
                              bool keep_rescaled = false);

}  // namespace spinmarket
