#include "spinmarket/noise.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace spinmarket {

namespace {

// The smallest u is 2^-53, so no index beyond floor(53 ln 2 / ln K) is
// reachable. K close to 1 would need a huge table; cap it.
constexpr std::size_t kMaxTabulated = 1 << 16;
constexpr double kSmallestUniform = 0x1.0p-53;

}  // namespace

WMNoiseParams::WMNoiseParams(double K, double b, double b0) : K_(K), b_(b), b0_(b0) {
  if (!(std::isfinite(K) && K > 1.0)) {
    throw std::invalid_argument("WM noise: K must be finite and > 1, got " + std::to_string(K));
  }
  if (!(std::isfinite(b) && b > 1.0)) {
    throw std::invalid_argument("WM noise: b must be finite and > 1, got " + std::to_string(b));
  }
  if (!(std::isfinite(b0) && b0 > 0.0)) {
    throw std::invalid_argument("WM noise: b0 must be finite and > 0, got " + std::to_string(b0));
  }
}

double WMNoiseParams::beta() const noexcept { return std::log(K_) / std::log(b_); }

double WMNoiseParams::variance() const noexcept {
  if (!has_finite_variance()) return std::numeric_limits<double>::infinity();
  return b0_ * b0_ * (1.0 - 1.0 / K_) / (1.0 - b_ * b_ / K_);
}

double WMNoiseParams::spike_probability(int j) const noexcept {
  if (j < 0) return 0.0;
  return (1.0 - 1.0 / K_) * std::pow(K_, -static_cast<double>(j));
}

double WMNoiseParams::spike_magnitude(int j) const noexcept {
  return b0_ * std::pow(b_, static_cast<double>(j));
}

double wm_variance(const WMNoiseParams& p) noexcept { return p.variance(); }

double wm_beta(const WMNoiseParams& p) noexcept { return p.beta(); }

double wm_tail_pdf(const WMNoiseParams& p, double x) {
  if (x == 0.0) throw std::domain_error("wm_tail_pdf: x must be nonzero");
  const double beta = p.beta();
  return (1.0 - 1.0 / p.K()) / std::log(p.K()) * std::pow(p.b0(), beta) /
         std::pow(std::abs(x), 1.0 + beta);
}

double effective_sigma(const NoiseSpec& spec) {
  if (const auto* g = std::get_if<GaussianNoise>(&spec)) {
    if (!(g->sigma > 0.0)) throw std::invalid_argument("Gaussian noise: sigma must be > 0");
    return g->sigma;
  }
  const auto& wm = std::get<WMNoiseParams>(spec);
  if (!wm.has_finite_variance()) {
    throw std::domain_error("WM noise has infinite variance (b^2 >= K); sigma undefined");
  }
  return std::sqrt(wm.variance());
}

WmSampler::WmSampler(const WMNoiseParams& params) : params_(params) {
  cut_points_.push_back(1.0);
  while (cut_points_.size() < kMaxTabulated) {
    const double next = std::pow(params_.K(), -static_cast<double>(cut_points_.size()));
    if (next < kSmallestUniform) break;
    cut_points_.push_back(next);
  }
  magnitudes_.resize(cut_points_.size());
  for (std::size_t j = 0; j < magnitudes_.size(); ++j) {
    magnitudes_[j] = params_.spike_magnitude(static_cast<int>(j));
  }
}

GaussianSampler::GaussianSampler(double sigma) : sigma_(sigma) {
  if (!(std::isfinite(sigma) && sigma > 0.0)) {
    throw std::invalid_argument("Gaussian noise: sigma must be finite and > 0");
  }
}

double wm_sample(const WMNoiseParams& params, Rng& rng) { return WmSampler(params)(rng); }

double gaussian_sample(double sigma, Rng& rng) {
  if (!(std::isfinite(sigma) && sigma > 0.0)) {
    throw std::invalid_argument("gaussian_sample: sigma must be finite and > 0");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  return sigma * normal(rng);
}

}  // namespace spinmarket
