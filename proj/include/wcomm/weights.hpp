#pragma once

#include <span>
#include <vector>

#include "wcomm/grid.hpp"

namespace wcomm {

struct WeightSpec {
  enum class Kind { constant, power, samples };
  Kind kind = Kind::constant;
  double value = 1.0;            // constant level
  double alpha = 0.0;            // power exponent
  std::vector<double> center;    // power singularity, a lattice point
  std::vector<double> samples;   // per-cell values

  static WeightSpec constant(double c);
  static WeightSpec power(double alpha, std::vector<double> center);
  static WeightSpec sampled(std::vector<double> values);
};

// Strictly positive cell function with exact box-mass queries.
class Weight {
 public:
  Weight(const TorusGrid& grid, std::vector<double> values);

  const TorusGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  double mass(const Region& r) const;
  double mass(const DyadicCube& q) const;
  double mass_box(const WrappedBox& b) const;
  double total() const;

  Weight pow(double exponent) const;
  Weight inverse() const { return pow(-1.0); }
  GridFunction as_function() const { return GridFunction(grid_, values_); }

 private:
  long double prefix_query(const WrappedBox& unwrapped) const;

  TorusGrid grid_;
  std::vector<double> values_;
  std::vector<long double> prefix_;  // (N+1)^n inclusive table of value * h^n
};

Weight make_weight(const TorusGrid& grid, const WeightSpec& spec);
Weight nu_from(const Weight& mu, const Weight& lambda);

// Torus distance from cell centers to a point, per cell.
std::vector<double> torus_distances(const TorusGrid& grid, std::span<const double> point);

// The two weights of a two-weight problem and the weights derived from them.
struct WeightPair {
  Weight mu;
  Weight lambda;
  Weight nu;          // mu^{1/2} lambda^{-1/2}
  Weight mu_inv;
  Weight lambda_inv;
  Weight nu_inv;

  static WeightPair from(const Weight& mu, const Weight& lambda);
};

enum class A2Scope { dyadic_all_shifts, all_boxes };

double a2_constant(const Weight& w, A2Scope scope = A2Scope::dyadic_all_shifts);
double a2_constant(const Weight& w, std::span<const DyadicSystem> systems);

struct ReverseHolder {
  double sigma = 0.0;
  double constant = 1.0;
  std::vector<double> constants;  // realized constant for every candidate
};

// Realized reverse Holder constant at one exponent over all cubes of the systems.
double reverse_holder_constant(const Weight& w, double sigma,
                               std::span<const DyadicSystem> systems);

// Largest candidate whose realized constant stays within the acceptance bound; the
// smallest candidate is reported when none qualifies.
ReverseHolder reverse_holder_exponent(const Weight& w, std::span<const double> candidates,
                                      double max_constant = 2.0);

double doubling_ratio(const Weight& w, const DyadicCube& q, double c);

}  // namespace wcomm
