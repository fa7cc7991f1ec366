#pragma once

#include <cstdint>
#include <vector>

#include "wcomm/grid.hpp"

namespace wcomm {

// Signature bits: bit (n-1-i) carries epsilon_i, so numeric order is binary order of epsilon.
struct Signature {
  unsigned bits = 0;
  int n = 0;

  bool cancellative() const { return bits != (1u << n) - 1; }
  int component(int axis) const { return (bits >> (n - 1 - axis)) & 1u; }
  // Sign of the Haar function on the child at position t (same bit layout).
  int sign_on_child(unsigned t) const;
  static int cancellative_count(int n) { return (1 << n) - 1; }
};

GridFunction haar_function(const DyadicCube& q, Signature eps, const TorusGrid& grid);
GridFunction indicator(const DyadicCube& q, const TorusGrid& grid);

// Haar expansion in one dyadic system: coarse mean, cancellative coefficients for
// levels 0..L-1, and the cell-scale detail left inside each level-L cube.
class HaarCoefficients {
 public:
  HaarCoefficients(const DyadicSystem& system, double coarse, std::vector<double> coeffs,
                   GridFunction fine);
  static HaarCoefficients zero(const DyadicSystem& system);

  int omega() const { return omega_; }
  int dim() const { return n_; }
  int depth() const { return L_; }
  double coarse() const { return coarse_; }
  double& coarse() { return coarse_; }
  const GridFunction& fine() const { return fine_; }
  GridFunction& fine() { return fine_; }

  double coeff(const DyadicCube& q, unsigned eps) const { return coeffs_[slot(q.level, q.flat_m, eps)]; }
  double& coeff(const DyadicCube& q, unsigned eps) { return coeffs_[slot(q.level, q.flat_m, eps)]; }
  double at(int level, std::int64_t m, unsigned eps) const { return coeffs_[slot(level, m, eps)]; }
  double& at(int level, std::int64_t m, unsigned eps) { return coeffs_[slot(level, m, eps)]; }
  // Cancellative coefficients of one cube, in signature order.
  std::span<const double> block(int level, std::int64_t m) const;
  std::span<const double> all() const { return coeffs_; }
  std::span<double> all() { return coeffs_; }

  double squared_norm() const;  // coarse^2 + sum coeff^2 + |fine|^2

 private:
  std::size_t slot(int level, std::int64_t m, unsigned eps) const;

  int omega_;
  int n_;
  int L_;
  double coarse_;
  std::vector<double> coeffs_;
  std::vector<std::size_t> level_offset_;
  GridFunction fine_;
};

// Cube averages for every level, indexed [level][flat m].
std::vector<std::vector<double>> cube_averages(const GridFunction& b, const DyadicSystem& system);

HaarCoefficients analyze(const GridFunction& b, const DyadicSystem& system);
GridFunction synthesize(const HaarCoefficients& coeffs, const DyadicSystem& system);

GridFunction expectation(const GridFunction& b, const DyadicSystem& system, int level);
GridFunction martingale_difference(const GridFunction& b, const DyadicCube& q,
                                   const DyadicSystem& system);

// Average of b over q rebuilt from the coefficients of strictly larger cubes.
double average_from_ancestors(const HaarCoefficients& coeffs, const DyadicCube& q,
                              const DyadicSystem& system);

// Spreads one value per level-k cube over that cube's cells.
GridFunction expand_level(const std::vector<double>& values, int level, const DyadicSystem& system);

}  // namespace wcomm
