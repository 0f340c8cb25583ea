#include "spinmarket/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace spinmarket {

namespace {

std::variant<GaussianSampler, WmSampler> make_sampler(const NoiseSpec& noise) {
  if (const auto* g = std::get_if<GaussianNoise>(&noise)) return GaussianSampler(g->sigma);
  return WmSampler(std::get<WMNoiseParams>(noise));
}

}  // namespace

void ModelParams::validate() const {
  if (!(std::isfinite(coupling) && coupling > 0.0)) {
    throw std::invalid_argument("model: coupling J must be finite and > 0");
  }
  if (!(std::isfinite(lambda) && lambda >= 0.0)) {
    throw std::invalid_argument("model: lambda must be finite and >= 0");
  }
  if (const auto* g = std::get_if<GaussianNoise>(&noise)) {
    if (!(std::isfinite(g->sigma) && g->sigma > 0.0)) {
      throw std::invalid_argument("model: Gaussian sigma must be finite and > 0");
    }
  }
}

ModelParams ModelParams::from_alphas(double coupling, double alpha_lambda, double alpha_sigma,
                                     const NoiseSpec& noise_shape) {
  ModelParams p;
  p.coupling = coupling;
  p.lambda = 4.0 * coupling * alpha_lambda;
  const double sigma = 4.0 * coupling * alpha_sigma;
  if (std::holds_alternative<GaussianNoise>(noise_shape)) {
    p.noise = GaussianNoise{sigma};
  } else {
    const auto& wm = std::get<WMNoiseParams>(noise_shape);
    if (!wm.has_finite_variance()) {
      throw std::domain_error("from_alphas: WM noise with b^2 >= K has no finite sigma to scale");
    }
    const double unit_sigma = std::sqrt(WMNoiseParams(wm.K(), wm.b(), 1.0).variance());
    p.noise = WMNoiseParams(wm.K(), wm.b(), sigma / unit_sigma);
  }
  p.validate();
  return p;
}

Spin update_agent(SpinLattice& lattice, std::size_t i, double threshold, double noise_value,
                  const ModelParams& params) {
  const double field = lattice.local_field(i, params.coupling);
  const Spin next = sign_threshold(field + noise_value, threshold);
  lattice.set_spin(i, next);
  return next;
}

void apply_drawings(SpinLattice& lattice, std::span<const Drawing> drawings, double threshold,
                    double coupling, RoundTally* tally) {
  std::int64_t gross = 0;
  for (const auto& d : drawings) {
    const Spin before = lattice.spin(d.site);
    const Spin after = sign_threshold(lattice.local_field(d.site, coupling) + d.noise, threshold);
    lattice.set_spin(d.site, after);
    gross += std::abs(after - before);
  }
  if (tally) tally->gross_changes += gross;
}

RoundRunner::RoundRunner(const ModelParams& params)
    : params_(params), sampler_(make_sampler(params.noise)) {
  params_.validate();
}

double run_round(SpinLattice& lattice, const ModelParams& params, double m_prev, Rng& rng,
                 RoundTally* tally) {
  RoundRunner runner(params);
  return runner.run_round(lattice, m_prev, rng, tally);
}

}  // namespace spinmarket
