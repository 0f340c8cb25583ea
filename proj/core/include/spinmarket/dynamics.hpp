#pragma once

// Threshold update rule and the round procedure.
//
// A drawing picks a site i uniformly (with replacement), draws one noise value
// nu and sets s_i <- sign_q(J * sum_nb s_j + nu) with q = lambda |M_prev|.
// Neighbor spins are read live; q stays frozen at the previous round's
// magnetization for the whole round. A round is N drawings.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <variant>

#include "spinmarket/lattice.hpp"
#include "spinmarket/noise.hpp"
#include "spinmarket/rng.hpp"

namespace spinmarket {

struct ModelParams {
  double coupling = 1.0;  ///< J > 0
  double lambda = 1.0;    ///< threshold scale >= 0
  NoiseSpec noise = GaussianNoise{1.0};

  /// Throws std::invalid_argument on J <= 0, lambda < 0 or invalid noise.
  void validate() const;

  double alpha_lambda() const noexcept { return lambda / (4.0 * coupling); }
  /// Throws std::domain_error for WM noise with infinite variance.
  double alpha_sigma() const { return effective_sigma(noise) / (4.0 * coupling); }

  /// lambda = 4 J alpha_lambda. Gaussian noise gets sigma = 4 J alpha_sigma;
  /// WM noise keeps K and b and rescales b0 so its standard deviation is
  /// 4 J alpha_sigma (requires b^2 < K).
  static ModelParams from_alphas(double coupling, double alpha_lambda, double alpha_sigma,
                                 const NoiseSpec& noise_shape);

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// +1 if x >= q, 0 if -q <= x < q, -1 if x < -q.
constexpr Spin sign_threshold(double x, double q) noexcept {
  if (x >= q) return 1;
  if (x >= -q) return 0;
  return -1;
}

/// Applies one drawing at site i and returns the new spin.
/// Throws std::out_of_range for a bad index.
Spin update_agent(SpinLattice& lattice, std::size_t i, double threshold, double noise_value,
                  const ModelParams& params);

struct RoundTally {
  /// Sum of |s_new - s_old| over individual drawings (gross, not net).
  std::int64_t gross_changes = 0;
};

/// A scripted drawing, used to replay fixed sequences.
struct Drawing {
  std::uint32_t site;
  double noise;
};

/// Applies drawings in order with a fixed threshold.
void apply_drawings(SpinLattice& lattice, std::span<const Drawing> drawings, double threshold,
                    double coupling, RoundTally* tally = nullptr);

/// Owns the noise sampler for one replica and runs rounds with it.
///
/// Stream contract per drawing: the site index is drawn first via
/// uniform_index(rng, N), then exactly one noise value from the sampler.
class RoundRunner {
 public:
  explicit RoundRunner(const ModelParams& params);

  const ModelParams& params() const noexcept { return params_; }

  /// Runs N drawings; returns the magnetization at the end of the round.
  double run_round(SpinLattice& lattice, double m_prev, Rng& rng, RoundTally* tally = nullptr) {
    return run_round(lattice, m_prev, rng, [](double nu) { return nu; }, tally);
  }

  /// As above, with every sampled noise value passed through `transform`.
  template <class Transform>
  double run_round(SpinLattice& lattice, double m_prev, Rng& rng, Transform&& transform,
                   RoundTally* tally = nullptr) {
    const double threshold = params_.lambda * (m_prev < 0 ? -m_prev : m_prev);
    std::visit(
        [&](auto& sampler) {
          run_kernel(lattice, threshold, rng, sampler, transform, tally);
        },
        sampler_);
    return lattice.magnetization();
  }

 private:
  template <class Sampler, class Transform>
  void run_kernel(SpinLattice& lattice, double threshold, Rng& rng, Sampler& sampler,
                  Transform& transform, RoundTally* tally) {
    const auto n = static_cast<std::uint32_t>(lattice.size());
    const double coupling = params_.coupling;
    std::int64_t gross = 0;
    for (std::uint32_t k = 0; k < n; ++k) {
      const std::uint32_t site = uniform_index(rng, n);
      const double nu = transform(sampler(rng));
      const Spin before = lattice.spin_unchecked(site);
      const Spin after =
          sign_threshold(coupling * lattice.neighbor_sum_unchecked(site) + nu, threshold);
      lattice.set_spin_unchecked(site, after);
      gross += after > before ? after - before : before - after;
    }
    if (tally) tally->gross_changes += gross;
  }

  ModelParams params_;
  std::variant<GaussianSampler, WmSampler> sampler_;
};

/// Convenience wrapper: builds a RoundRunner and runs one round. Note that a
/// fresh runner also means a fresh Gaussian sampler state.
double run_round(SpinLattice& lattice, const ModelParams& params, double m_prev, Rng& rng,
                 RoundTally* tally = nullptr);

}  // namespace spinmarket
