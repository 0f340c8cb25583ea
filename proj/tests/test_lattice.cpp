#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "spinmarket/lattice.hpp"
#include "spinmarket/rng.hpp"

using namespace spinmarket;

TEST(SpinLattice, RejectsTinySides) {
  EXPECT_THROW(SpinLattice(2), std::invalid_argument);
  EXPECT_THROW(SpinLattice(0), std::invalid_argument);
  EXPECT_THROW(SpinLattice(-4), std::invalid_argument);
  EXPECT_NO_THROW(SpinLattice(3));
}

TEST(SpinLattice, CornerNeighborsOnThreeByThree) {
  const SpinLattice lattice(3);
  const auto nb = lattice.neighbors(0);
  EXPECT_EQ(nb[SpinLattice::kUp], 6u);
  EXPECT_EQ(nb[SpinLattice::kDown], 3u);
  EXPECT_EQ(nb[SpinLattice::kLeft], 2u);
  EXPECT_EQ(nb[SpinLattice::kRight], 1u);
  EXPECT_THROW(lattice.neighbors(9), std::out_of_range);
}

TEST(SpinLattice, NeighborGraphIsFourRegularAndSymmetric) {
  for (int n : {3, 4, 7, 32}) {
    const SpinLattice lattice(n);
    std::vector<int> in_degree(lattice.size(), 0);
    for (std::size_t i = 0; i < lattice.size(); ++i) {
      const auto nb = lattice.neighbors(i);
      for (auto j : nb) {
        ++in_degree[j];
        const auto back = lattice.neighbors(j);
        EXPECT_NE(std::find(back.begin(), back.end(), i), back.end());
      }
      EXPECT_EQ(lattice.neighbors(nb[SpinLattice::kUp])[SpinLattice::kDown], i);
      EXPECT_EQ(lattice.neighbors(nb[SpinLattice::kLeft])[SpinLattice::kRight], i);
      EXPECT_EQ(lattice.neighbors(nb[SpinLattice::kDown])[SpinLattice::kUp], i);
      EXPECT_EQ(lattice.neighbors(nb[SpinLattice::kRight])[SpinLattice::kLeft], i);
    }
    for (int d : in_degree) EXPECT_EQ(d, 4);
  }
}

TEST(SpinLattice, NMovesInOneDirectionReturnHome) {
  const int n = 5;
  const SpinLattice lattice(n);
  for (std::size_t dir = 0; dir < 4; ++dir) {
    for (std::size_t start = 0; start < lattice.size(); ++start) {
      std::size_t i = start;
      for (int k = 0; k < n; ++k) i = lattice.neighbors(i)[dir];
      EXPECT_EQ(i, start);
    }
  }
}

TEST(SpinLattice, MagnetizationExamples) {
  SpinLattice lattice(4);
  lattice.fill(1);
  EXPECT_DOUBLE_EQ(lattice.magnetization(), 1.0);
  lattice.fill(0);
  EXPECT_DOUBLE_EQ(magnetization(lattice), 0.0);
  lattice.fill(-1);
  EXPECT_DOUBLE_EQ(lattice.magnetization(), -1.0);

  // The pattern {+1, +1, -1, 0} tiled over a 4x4 lattice: M = 1/4.
  std::vector<Spin> spins;
  for (int k = 0; k < 4; ++k) spins.insert(spins.end(), {1, 1, -1, 0});
  EXPECT_DOUBLE_EQ(SpinLattice::from_spins(4, spins).magnetization(), 0.25);
}

TEST(SpinLattice, LocalFieldExamples) {
  SpinLattice lattice(3);
  lattice.fill(1);
  EXPECT_DOUBLE_EQ(lattice.local_field(4, 1.0), 4.0);

  // Site 4 (centre): up 1, down 7, left 3, right 5.
  lattice.fill(0);
  lattice.set_spin(1, 1);
  lattice.set_spin(7, -1);
  lattice.set_spin(3, 1);
  lattice.set_spin(5, -1);
  EXPECT_DOUBLE_EQ(lattice.local_field(4, 1.0), 0.0);

  lattice.fill(0);
  lattice.set_spin(1, 1);
  lattice.set_spin(5, -1);
  EXPECT_DOUBLE_EQ(lattice.local_field(4, 2.0), 0.0);

  lattice.set_spin(4, -1);  // own spin does not count
  EXPECT_EQ(lattice.neighbor_sum(4), 0);
  EXPECT_THROW(lattice.local_field(9, 1.0), std::out_of_range);
}

TEST(SpinLattice, SetSpinValidatesAndTracksSum) {
  SpinLattice lattice(3);
  EXPECT_THROW(lattice.set_spin(0, 2), std::invalid_argument);
  EXPECT_THROW(lattice.set_spin(0, -2), std::invalid_argument);
  EXPECT_THROW(lattice.set_spin(9, 1), std::out_of_range);
  lattice.set_spin(0, 1);
  lattice.set_spin(1, -1);
  lattice.set_spin(2, -1);
  EXPECT_EQ(lattice.spin_sum(), -1);
  lattice.set_spin(1, 0);
  EXPECT_EQ(lattice.spin_sum(), 0);
}

TEST(SpinLattice, FromSpinsValidates) {
  const std::vector<Spin> short_spins(8, 0);
  EXPECT_THROW(SpinLattice::from_spins(3, short_spins), std::invalid_argument);
  std::vector<Spin> bad(9, 0);
  bad[4] = 3;
  EXPECT_THROW(SpinLattice::from_spins(3, bad), std::invalid_argument);
}

TEST(SpinLattice, RandomizeIsUniformOverThreeStates) {
  constexpr int kTrials = 30000;
  SpinLattice lattice(3);
  Rng rng(derive_seed(1, 0));
  std::array<std::int64_t, 3> counts{};
  for (int k = 0; k < kTrials; ++k) {
    lattice.randomize(rng);
    for (Spin s : lattice.spins()) ++counts[s + 1];
  }
  const double total = 9.0 * kTrials;
  const double sd = std::sqrt(total * (1.0 / 3.0) * (2.0 / 3.0));
  for (auto c : counts) EXPECT_NEAR(static_cast<double>(c), total / 3.0, 3.0 * sd);

  // Single 32x32 draws: M has standard deviation sqrt(2/3 / 1024).
  SpinLattice big(32);
  big.randomize(rng);
  EXPECT_LT(std::abs(big.magnetization()), 4.0 * std::sqrt(2.0 / 3.0 / 1024.0));
  std::int64_t sum = 0;
  for (Spin s : big.spins()) sum += s;
  EXPECT_EQ(sum, big.spin_sum());
}

TEST(SpinLattice, RandomizeIsDeterministic) {
  SpinLattice a(16);
  SpinLattice b(16);
  Rng ra(5);
  Rng rb(5);
  a.randomize(ra);
  b.randomize(rb);
  EXPECT_EQ(a, b);
  b.randomize(rb);
  EXPECT_FALSE(a == b);
}

TEST(Snapshot, RoundTrip) {
  Rng rng(77);
  for (int n : {3, 5, 32}) {
    SpinLattice lattice(n);
    lattice.randomize(rng);
    std::stringstream buffer;
    write_snapshot(buffer, lattice);
    const SpinLattice back = read_snapshot(buffer);
    EXPECT_EQ(back, lattice);
    EXPECT_EQ(back.spin_sum(), lattice.spin_sum());
  }
}

TEST(Snapshot, TextLayout) {
  SpinLattice lattice(3);
  lattice.set_spin(0, 1);
  lattice.set_spin(4, -1);
  std::ostringstream out;
  write_snapshot(out, lattice);
  EXPECT_EQ(out.str(), "3\n1,0,0\n0,-1,0\n0,0,0\n");
}

TEST(Snapshot, MalformedInputThrows) {
  for (const char* text : {"", "x\n", "3\n1,0,0\n0,0\n", "3\n1,0,0\n0,2,0\n0,0,0\n", "2\n1,0\n0,0\n"}) {
    std::istringstream in(text);
    EXPECT_ANY_THROW(read_snapshot(in)) << text;
  }
}
