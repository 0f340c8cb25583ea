#pragma once

// Agent noise: the Weierstrass-Mandelbrot (WM) spike distribution and the
// Gaussian baseline.
//
// WM places mass (1 - 1/K) K^-j / 2 on each of +-b0 b^j, j = 0, 1, 2, ...
// Its variance b0^2 (1 - 1/K) / (1 - b^2/K) exists only when b^2 < K, and its
// envelope decays like |x|^-(1+beta) with beta = ln K / ln b.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <variant>
#include <vector>

#include "spinmarket/rng.hpp"

namespace spinmarket {

class WMNoiseParams {
 public:
  /// Throws std::invalid_argument unless K > 1, b > 1, b0 > 0 (all finite).
  WMNoiseParams(double K, double b, double b0);

  double K() const noexcept { return K_; }
  double b() const noexcept { return b_; }
  double b0() const noexcept { return b0_; }

  /// ln K / ln b.
  double beta() const noexcept;
  /// +infinity when b^2 >= K.
  double variance() const noexcept;
  bool has_finite_variance() const noexcept { return b_ * b_ < K_; }

  /// Weight (1 - 1/K) K^-j of the spike pair at index j.
  double spike_probability(int j) const noexcept;
  /// b0 b^j.
  double spike_magnitude(int j) const noexcept;

  friend bool operator==(const WMNoiseParams&, const WMNoiseParams&) = default;

 private:
  double K_;
  double b_;
  double b0_;
};

double wm_variance(const WMNoiseParams& p) noexcept;
double wm_beta(const WMNoiseParams& p) noexcept;

/// Smooth power-law envelope ((1 - 1/K) / ln K) b0^beta / |x|^(1+beta).
/// Only meaningful for |x| >> 1 / ln b; that range is not checked.
/// Throws std::domain_error for x == 0.
double wm_tail_pdf(const WMNoiseParams& p, double x);

struct GaussianNoise {
  double sigma;
  friend bool operator==(const GaussianNoise&, const GaussianNoise&) = default;
};

using NoiseSpec = std::variant<GaussianNoise, WMNoiseParams>;

/// sigma for Gaussian noise, sqrt(variance) for WM. Throws std::domain_error
/// when the WM variance is infinite, std::invalid_argument for sigma <= 0.
double effective_sigma(const NoiseSpec& spec);

/// Exact WM sampler. One 64-bit draw per sample: the low bit picks the sign
/// and the top 53 bits give u in (0, 1]. The spike index is the inverse CDF
/// of the geometric law, j = max{m : u <= K^-m}, i.e. floor(ln(1/u) / ln K),
/// found by scanning the tabulated cut points K^-m. The table reaches every
/// index a 53-bit u can produce, so the series is never truncated.
class WmSampler {
 public:
  explicit WmSampler(const WMNoiseParams& params);

  double operator()(Rng& rng) const noexcept {
    const std::uint64_t bits = rng();
    const double magnitude = magnitude_for(index_from_bits(bits));
    return (bits & 1u) ? -magnitude : magnitude;
  }

  /// Spike index j encoded by one raw draw.
  int index_from_bits(std::uint64_t bits) const noexcept {
    const double u = uniform_open_closed(bits);
    std::size_t j = 0;
    while (j + 1 < cut_points_.size() && u <= cut_points_[j + 1]) ++j;
    return static_cast<int>(j);
  }

  double magnitude_for(int j) const noexcept {
    return static_cast<std::size_t>(j) < magnitudes_.size() ? magnitudes_[j]
                                                              : params_.spike_magnitude(j);
  }

  /// Largest index the sampler can emit.
  int max_index() const noexcept { return static_cast<int>(cut_points_.size()) - 1; }

  const WMNoiseParams& params() const noexcept { return params_; }

 private:
  WMNoiseParams params_;
  std::vector<double> cut_points_;  ///< K^-m, m = 0, 1, ... down to 2^-53
  std::vector<double> magnitudes_;
};

/// Gaussian sampler sigma * z. Holds the distribution state, so a stream of
/// calls on one sampler is reproducible given the seed.
class GaussianSampler {
 public:
  explicit GaussianSampler(double sigma);
  double operator()(Rng& rng) { return sigma_ * normal_(rng); }
  double sigma() const noexcept { return sigma_; }

 private:
  double sigma_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

double wm_sample(const WMNoiseParams& params, Rng& rng);
double gaussian_sample(double sigma, Rng& rng);

}  // namespace spinmarket
