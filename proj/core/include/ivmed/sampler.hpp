#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ivmed/population.hpp"

namespace ivmed {

struct Observation {
  std::uint8_t d = 0;
  std::uint8_t z = 0;
  std::uint8_t m = 0;
  double y = 0.0;

  friend bool operator==(const Observation&, const Observation&) = default;
};

struct Dataset {
  std::vector<Observation> rows;
  std::uint64_t seed = 0;

  std::size_t size() const { return rows.size(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Sufficient statistics of a dataset for every estimator in the library:
/// counts and outcome sums for each of the eight (d, z, m) cells.
/// Sums use Neumaier compensation and are accumulated in row order.
class CellTable {
 public:
  void add(int d, int z, int m, double y);

  std::uint64_t count(int d, int z, int m) const { return cells_[d][z][m].n; }
  double sum_y(int d, int z, int m) const { return cells_[d][z][m].sum + cells_[d][z][m].carry; }

  std::uint64_t count(int d, int z) const { return count(d, z, 0) + count(d, z, 1); }
  std::uint64_t total() const;

  friend bool operator==(const CellTable&, const CellTable&) = default;

 private:
  struct Cell {
    std::uint64_t n = 0;
    double sum = 0.0;
    double carry = 0.0;
    friend bool operator==(const Cell&, const Cell&) = default;
  };
  Cell cells_[2][2][2];
};

CellTable tabulate(const Dataset& ds);

struct DrawOptions {
  /// Worker threads; 0 selects std::thread::hardware_concurrency().
  /// Output never depends on this value.
  unsigned threads = 1;
};

/// Draws n i.i.d. rows. Row i uses its own stream keyed by (seed, i):
/// stratum ~ categorical(weights), D ~ Bernoulli(p_d), Z ~ Bernoulli(p_z),
/// M = M(D,Z), Y = Y(D,M) + noise_sd * N(0,1).
///
/// Throws DomainError when n == 0 and InvalidPopulation for invalid input.
Dataset draw(const Population& pop, std::size_t n, std::uint64_t seed, DrawOptions opts = {});

/// Equivalent to tabulate(draw(pop, n, seed)) without materializing rows.
CellTable draw_cells(const Population& pop, std::size_t n, std::uint64_t seed);

/// CSV with header `d,z,m,y`; y printed with 17 significant digits.
void write_csv(std::ostream& out, const Dataset& ds);
std::string to_csv(const Dataset& ds);

/// Parses the CSV produced by write_csv. Throws ParseError with the line
/// number on malformed input. The returned dataset has seed 0.
Dataset read_csv(std::istream& in);

}  // namespace ivmed
