#include "spinmarket/lattice.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace spinmarket {

namespace {

bool valid_spin(int s) { return s >= -1 && s <= 1; }

}  // namespace

SpinLattice::SpinLattice(int n) : n_(n) {
  if (n < 3) {
    throw std::invalid_argument("SpinLattice: side length must be >= 3, got " + std::to_string(n));
  }
  const auto side = static_cast<std::size_t>(n);
  spins_.assign(side * side, 0);
  table_.resize(side * side);
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      auto& nb = table_[r * side + c];
      nb[kUp] = static_cast<std::uint32_t>(((r + side - 1) % side) * side + c);
      nb[kDown] = static_cast<std::uint32_t>(((r + 1) % side) * side + c);
      nb[kLeft] = static_cast<std::uint32_t>(r * side + (c + side - 1) % side);
      nb[kRight] = static_cast<std::uint32_t>(r * side + (c + 1) % side);
    }
  }
}

SpinLattice SpinLattice::from_spins(int n, std::span<const Spin> spins) {
  SpinLattice lattice(n);
  if (spins.size() != lattice.size()) {
    throw std::invalid_argument("SpinLattice::from_spins: expected " +
                                std::to_string(lattice.size()) + " spins, got " +
                                std::to_string(spins.size()));
  }
  for (std::size_t i = 0; i < spins.size(); ++i) lattice.set_spin(i, spins[i]);
  return lattice;
}

void SpinLattice::set_spin(std::size_t i, Spin value) {
  if (i >= spins_.size()) throw std::out_of_range("SpinLattice: site index out of range");
  if (!valid_spin(value)) throw std::invalid_argument("SpinLattice: spin must be -1, 0 or +1");
  set_spin_unchecked(i, value);
}

void SpinLattice::fill(Spin value) {
  if (!valid_spin(value)) throw std::invalid_argument("SpinLattice: spin must be -1, 0 or +1");
  std::fill(spins_.begin(), spins_.end(), value);
  sum_ = static_cast<std::int64_t>(value) * static_cast<std::int64_t>(spins_.size());
}

std::array<std::size_t, 4> SpinLattice::neighbors(std::size_t i) const {
  if (i >= spins_.size()) throw std::out_of_range("SpinLattice: site index out of range");
  const auto& nb = table_[i];
  return {nb[0], nb[1], nb[2], nb[3]};
}

int SpinLattice::neighbor_sum(std::size_t i) const {
  if (i >= spins_.size()) throw std::out_of_range("SpinLattice: site index out of range");
  return neighbor_sum_unchecked(i);
}

double SpinLattice::local_field(std::size_t i, double coupling) const {
  return coupling * neighbor_sum(i);
}

void SpinLattice::randomize(Rng& rng) {
  sum_ = 0;
  for (auto& s : spins_) {
    s = static_cast<Spin>(static_cast<int>(uniform_index(rng, 3)) - 1);
    sum_ += s;
  }
}

double magnetization(const SpinLattice& lattice) noexcept { return lattice.magnetization(); }

void write_snapshot(std::ostream& out, const SpinLattice& lattice) {
  const auto n = static_cast<std::size_t>(lattice.side());
  out << n << '\n';
  const auto spins = lattice.spins();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      if (c) out << ',';
      out << static_cast<int>(spins[r * n + c]);
    }
    out << '\n';
  }
}

SpinLattice read_snapshot(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("snapshot: missing side length");
  int n = 0;
  try {
    n = std::stoi(line);
  } catch (const std::exception&) {
    throw std::runtime_error("snapshot: bad side length '" + line + "'");
  }
  std::vector<Spin> spins;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      int v = 0;
      try {
        v = std::stoi(cell);
      } catch (const std::exception&) {
        throw std::runtime_error("snapshot: bad spin value '" + cell + "'");
      }
      if (!valid_spin(v)) throw std::runtime_error("snapshot: spin out of range");
      spins.push_back(static_cast<Spin>(v));
    }
  }
  try {
    return SpinLattice::from_spins(n, spins);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("snapshot: ") + e.what());
  }
}

}  // namespace spinmarket
