#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "spinmarket/dynamics.hpp"
#include "spinmarket/rng.hpp"

using namespace spinmarket;
namespace oracle = spinmarket::testing;

namespace {

const WMNoiseParams kDefaultNoise(5.0, 2.0, 0.21);

ModelParams default_model() { return ModelParams{1.0, 1.0, kDefaultNoise}; }

std::vector<int> as_ints(std::span<const Spin> spins) { return {spins.begin(), spins.end()}; }

}  // namespace

TEST(SignThreshold, Examples) {
  EXPECT_EQ(sign_threshold(0.3, 0.25), 1);
  EXPECT_EQ(sign_threshold(0.25, 0.25), 1);
  EXPECT_EQ(sign_threshold(0.1, 0.25), 0);
  EXPECT_EQ(sign_threshold(-0.25, 0.25), 0);
  EXPECT_EQ(sign_threshold(-0.2500001, 0.25), -1);
  EXPECT_EQ(sign_threshold(0.0, 0.0), 1);
  EXPECT_EQ(sign_threshold(-0.0, 0.0), 1);
  EXPECT_EQ(sign_threshold(-1e-12, 0.0), -1);
  static_assert(sign_threshold(5.0, 1.0) == 1);
}

TEST(SignThreshold, AgreesWithReferenceAndIsMonotone) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> xs(-6.0, 6.0);
  std::uniform_real_distribution<double> qs(0.0, 3.0);
  for (int k = 0; k < 100000; ++k) {
    const double x = xs(gen);
    const double y = xs(gen);
    const double q = qs(gen);
    ASSERT_EQ(sign_threshold(x, q), oracle::reference_sign(x, q));
    if (x <= y) ASSERT_LE(sign_threshold(x, q), sign_threshold(y, q));
    // A higher threshold widens the inactive band.
    const double q2 = q + qs(gen);
    ASSERT_LE(std::abs(sign_threshold(x, q2)), std::abs(sign_threshold(x, q)));
  }
}

TEST(UpdateAgent, Examples) {
  const ModelParams params{1.0, 1.0, GaussianNoise{1.0}};
  SpinLattice lattice(3);
  lattice.fill(1);
  EXPECT_EQ(update_agent(lattice, 4, 1.0, 0.0, params), 1);

  lattice.fill(0);
  EXPECT_EQ(update_agent(lattice, 4, 0.25, 0.1, params), 0);
  EXPECT_EQ(lattice.spin(4), 0);
  EXPECT_EQ(update_agent(lattice, 4, 0.25, 0.25, params), 1);
  EXPECT_EQ(update_agent(lattice, 4, 0.25, -6.0, params), -1);
  EXPECT_EQ(lattice.spin(4), -1);
  EXPECT_THROW(update_agent(lattice, 9, 0.0, 0.0, params), std::out_of_range);
}

TEST(ModelParams, AlphasAndValidation) {
  const ModelParams p = default_model();
  EXPECT_DOUBLE_EQ(p.alpha_lambda(), 0.25);
  EXPECT_NEAR(p.alpha_sigma(), 0.105, 1e-14);
  EXPECT_NO_THROW(p.validate());
  EXPECT_THROW((ModelParams{0.0, 1.0, GaussianNoise{1.0}}.validate()), std::invalid_argument);
  EXPECT_THROW((ModelParams{1.0, -0.1, GaussianNoise{1.0}}.validate()), std::invalid_argument);
  EXPECT_THROW((ModelParams{1.0, 1.0, GaussianNoise{-1.0}}.validate()), std::invalid_argument);
  EXPECT_THROW((ModelParams{1.0, 1.0, WMNoiseParams(5, 3, 1)}.alpha_sigma()), std::domain_error);
}

TEST(ModelParams, FromAlphas) {
  const ModelParams wm = ModelParams::from_alphas(1.0, 0.25, 0.105, WMNoiseParams(5.0, 2.0, 1.0));
  EXPECT_DOUBLE_EQ(wm.lambda, 1.0);
  const auto& noise = std::get<WMNoiseParams>(wm.noise);
  EXPECT_NEAR(noise.b0(), 0.21, 1e-14);
  EXPECT_EQ(noise.K(), 5.0);
  EXPECT_EQ(noise.b(), 2.0);

  const ModelParams g = ModelParams::from_alphas(2.0, 1.5, 0.5, GaussianNoise{1.0});
  EXPECT_DOUBLE_EQ(g.lambda, 12.0);
  EXPECT_DOUBLE_EQ(std::get<GaussianNoise>(g.noise).sigma, 4.0);
  EXPECT_THROW(ModelParams::from_alphas(1.0, 0.25, 0.1, WMNoiseParams(5, 3, 1)), std::domain_error);
}

TEST(ApplyDrawings, MatchesReferenceOnRandomScripts) {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> site(0, 8);
  std::uniform_int_distribution<int> spin(-1, 1);
  std::normal_distribution<double> noise(0.0, 1.5);
  std::uniform_real_distribution<double> threshold(0.0, 4.0);
  for (int script = 0; script < 200; ++script) {
    std::vector<Spin> initial(9);
    for (auto& s : initial) s = static_cast<Spin>(spin(gen));
    const double q = threshold(gen);
    const double coupling = 0.5 + threshold(gen);
    std::vector<int> sites;
    std::vector<double> noises;
    std::vector<Drawing> drawings;
    for (int k = 0; k < 50; ++k) {
      sites.push_back(site(gen));
      // Integer-valued noise sometimes lands exactly on a threshold.
      noises.push_back(k % 5 == 0 ? std::round(noise(gen)) : noise(gen));
      drawings.push_back({static_cast<std::uint32_t>(sites.back()), noises.back()});
    }
    const auto expected =
        oracle::reference_trajectory(3, as_ints(initial), sites, noises, coupling, q);
    SpinLattice lattice = SpinLattice::from_spins(3, initial);
    for (int k = 0; k < 50; ++k) {
      apply_drawings(lattice, std::span(drawings).subspan(k, 1), q, coupling);
      ASSERT_EQ(as_ints(lattice.spins()), expected[k]) << "script " << script << " step " << k;
    }
  }
}

TEST(ApplyDrawings, CountsGrossChanges) {
  SpinLattice lattice(3);
  lattice.fill(-1);
  RoundTally tally;
  const std::vector<Drawing> drawings{{4, 10.0}, {4, -10.0}, {0, 0.0}};
  apply_drawings(lattice, drawings, 0.5, 1.0, &tally);
  // 4: -1 -> +1 (2), +1 -> -1 (2); 0: field -4 + 0 -> -1 (0).
  EXPECT_EQ(tally.gross_changes, 4);
}

TEST(RunRound, ConsumesSiteThenNoisePerDrawing) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const ModelParams params = default_model();
    SpinLattice lattice(8);
    Rng init(seed);
    lattice.randomize(init);
    SpinLattice manual = lattice;
    const double m_prev = lattice.magnetization();

    Rng rng(derive_seed(seed, 0));
    RoundRunner runner(params);
    runner.run_round(lattice, m_prev, rng);

    Rng replay(derive_seed(seed, 0));
    const WmSampler sampler(kDefaultNoise);
    std::vector<int> sites;
    std::vector<double> noises;
    for (std::size_t k = 0; k < manual.size(); ++k) {
      sites.push_back(static_cast<int>(uniform_index(replay, static_cast<std::uint32_t>(manual.size()))));
      noises.push_back(sampler(replay));
    }
    const auto states = oracle::reference_trajectory(8, as_ints(manual.spins()), sites, noises,
                                                     1.0, std::abs(m_prev));
    EXPECT_EQ(as_ints(lattice.spins()), states.back());
    EXPECT_EQ(rng, replay) << "the round consumed a different number of draws";
  }
}

TEST(RunRound, Deterministic) {
  const ModelParams params = default_model();
  SpinLattice a(16);
  Rng init(4);
  a.randomize(init);
  SpinLattice b = a;
  Rng ra(99);
  Rng rb(99);
  RoundRunner runner_a(params);
  RoundRunner runner_b(params);
  double ma = a.magnetization();
  double mb = b.magnetization();
  for (int t = 0; t < 50; ++t) {
    ma = runner_a.run_round(a, ma, ra);
    mb = runner_b.run_round(b, mb, rb);
    ASSERT_EQ(a, b);
    ASSERT_EQ(ma, mb);
  }
}

TEST(RunRound, LargeThresholdSilencesDrawnAgents) {
  const ModelParams params{1.0, 100.0, GaussianNoise{0.01}};
  SpinLattice lattice(8);
  lattice.fill(1);
  Rng rng(derive_seed(12, 0));
  Rng replay = rng;
  RoundRunner runner(params);
  runner.run_round(lattice, 1.0, rng);
  std::vector<bool> drawn(lattice.size(), false);
  GaussianSampler g(0.01);
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    drawn[uniform_index(replay, static_cast<std::uint32_t>(lattice.size()))] = true;
    g(replay);
  }
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    EXPECT_EQ(lattice.spin(i), drawn[i] ? 0 : 1) << i;
    zeros += lattice.spin(i) == 0;
  }
  EXPECT_GT(zeros, lattice.size() / 2);
}

TEST(RunRound, ZeroLambdaNeverProducesInactiveDrawnAgents) {
  const ModelParams params{1.0, 0.0, GaussianNoise{1.0}};
  SpinLattice lattice(8);
  Rng rng(derive_seed(13, 0));
  Rng replay = rng;
  RoundRunner runner(params);
  runner.run_round(lattice, 0.7, rng);
  GaussianSampler g(1.0);
  for (std::size_t k = 0; k < lattice.size(); ++k) {
    const auto i = uniform_index(replay, static_cast<std::uint32_t>(lattice.size()));
    g(replay);
    // Later drawings may revisit a site, but every visit leaves it nonzero.
    EXPECT_NE(lattice.spin(i), 0);
  }
}

TEST(RunRound, SpinsStayInStateSpaceAndSumIsExact) {
  const ModelParams params = default_model();
  SpinLattice lattice(12);
  Rng rng(derive_seed(21, 0));
  lattice.randomize(rng);
  RoundRunner runner(params);
  double m = lattice.magnetization();
  for (int t = 0; t < 200; ++t) {
    m = runner.run_round(lattice, m, rng);
    std::int64_t sum = 0;
    for (Spin s : lattice.spins()) {
      ASSERT_TRUE(s == -1 || s == 0 || s == 1);
      sum += s;
    }
    ASSERT_EQ(sum, lattice.spin_sum());
    ASSERT_EQ(m, static_cast<double>(sum) / 144.0);
  }
}

TEST(RunRound, ClampingNoiseBeyondMaximalFieldChangesNothing) {
  const ModelParams params = default_model();
  const double clamp = 4.0 * params.coupling + params.lambda + 1.0;
  SpinLattice a(16);
  Rng init(8);
  a.randomize(init);
  SpinLattice b = a;
  Rng ra(derive_seed(8, 0));
  Rng rb(derive_seed(8, 0));
  RoundRunner runner(params);
  double ma = a.magnetization();
  double mb = ma;
  for (int t = 0; t < 300; ++t) {
    ma = runner.run_round(a, ma, ra);
    mb = runner.run_round(b, mb, rb, [clamp](double nu) { return std::clamp(nu, -clamp, clamp); });
    ASSERT_EQ(a, b) << "round " << t;
  }
}

TEST(RunRound, FreeFunctionMatchesRunnerForWM) {
  const ModelParams params = default_model();
  SpinLattice a(8);
  SpinLattice b(8);
  Rng ra(6);
  Rng rb(6);
  RoundRunner runner(params);
  runner.run_round(a, 0.3, ra);
  run_round(b, params, 0.3, rb);
  EXPECT_EQ(a, b);
}
