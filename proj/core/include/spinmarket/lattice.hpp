#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "spinmarket/rng.hpp"

namespace spinmarket {

using Spin = std::int8_t;

/// n x n periodic square lattice of three-state spins, row-major.
///
/// Sites are indexed i = row * n + col. The lattice keeps an integer spin sum
/// alongside the spins so magnetization is always exactly sum / N.
/// Side lengths below 3 are unsupported (neighbors would coincide).
class SpinLattice {
 public:
  enum Direction : std::size_t { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

  /// All spins start at 0. Throws std::invalid_argument for n < 3.
  explicit SpinLattice(int n);

  /// Throws std::invalid_argument on size mismatch or spins outside {-1, 0, 1}.
  static SpinLattice from_spins(int n, std::span<const Spin> spins);

  int side() const noexcept { return n_; }
  std::size_t size() const noexcept { return spins_.size(); }

  Spin spin(std::size_t i) const { return spins_.at(i); }
  void set_spin(std::size_t i, Spin value);
  void fill(Spin value);

  std::span<const Spin> spins() const noexcept { return spins_; }

  std::int64_t spin_sum() const noexcept { return sum_; }
  double magnetization() const noexcept {
    return static_cast<double>(sum_) / static_cast<double>(spins_.size());
  }

  /// Up, down, left, right with wrap-around. Throws std::out_of_range.
  std::array<std::size_t, 4> neighbors(std::size_t i) const;

  /// Sum of the four neighbor spins, in [-4, 4].
  int neighbor_sum(std::size_t i) const;
  /// J * neighbor_sum(i).
  double local_field(std::size_t i, double coupling) const;

  /// Each spin independently uniform over {-1, 0, +1}.
  void randomize(Rng& rng);

  /// Hot-loop accessors: no bounds checks.
  int neighbor_sum_unchecked(std::size_t i) const noexcept {
    const auto& nb = table_[i];
    return spins_[nb[0]] + spins_[nb[1]] + spins_[nb[2]] + spins_[nb[3]];
  }
  Spin spin_unchecked(std::size_t i) const noexcept { return spins_[i]; }
  void set_spin_unchecked(std::size_t i, Spin value) noexcept {
    sum_ += value - spins_[i];
    spins_[i] = value;
  }

  friend bool operator==(const SpinLattice& a, const SpinLattice& b) noexcept {
    return a.n_ == b.n_ && a.spins_ == b.spins_;
  }

 private:
  int n_;
  std::vector<Spin> spins_;
  std::vector<std::array<std::uint32_t, 4>> table_;
  std::int64_t sum_ = 0;
};

double magnetization(const SpinLattice& lattice) noexcept;

/// Snapshot text: first line n, then N spin values row-major, comma-separated,
/// one lattice row per line.
void write_snapshot(std::ostream& out, const SpinLattice& lattice);
/// Throws std::runtime_error on malformed input.
SpinLattice read_snapshot(std::istream& in);

}  // namespace spinmarket
