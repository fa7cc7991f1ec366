#pragma once

#include <limits>
#include <span>
#include <vector>

#include "wcomm/grid.hpp"
#include "wcomm/weights.hpp"

namespace wcomm {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct IndexedSequence {
  std::vector<CubeKey> keys;
  std::vector<double> values;

  IndexedSequence() = default;
  IndexedSequence(std::vector<CubeKey> k, std::vector<double> v);
  // Sequence over every cube of a system, in ordinal order.
  static IndexedSequence over(const DyadicSystem& system, std::vector<double> values);
  static IndexedSequence constant(const DyadicSystem& system, double value);
  std::size_t size() const { return values.size(); }
};

std::vector<double> rearrange(const IndexedSequence& s);
std::vector<double> rearrange(std::span<const double> values);

// Lorentz quasi-norm of the decreasing rearrangement; q = infinity gives the weak norm.
double lorentz_norm(std::span<const double> values, double p, double q);
double lorentz_norm(const IndexedSequence& s, double p, double q);
double lp_norm(std::span<const double> values, double p);

IndexedSequence maximal_neighbor(const IndexedSequence& s, const DyadicSystem& system, double c);
IndexedSequence maximal_logweighted(const IndexedSequence& s, const DyadicSystem& system,
                                    const Weight& mu, double c);

enum class CarlesonMode { descendant_weighted, lebesgue };

struct CarlesonResult {
  IndexedSequence values;
  double cmd_norm = 0.0;  // sup of the values (the dyadic Carleson norm in lebesgue mode)
};

// `literal_summand` replaces s(R) by s(P) inside the lebesgue-mode average.
CarlesonResult maximal_carleson(const IndexedSequence& s, const DyadicSystem& system,
                                const Weight* nu, CarlesonMode mode, double c = 1.0,
                                bool literal_summand = false);

}  // namespace wcomm
