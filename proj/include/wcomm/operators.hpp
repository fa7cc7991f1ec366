#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wcomm/fft.hpp"
#include "wcomm/grid.hpp"
#include "wcomm/haar.hpp"
#include "wcomm/weights.hpp"

namespace wcomm {

struct RieszSpec {
  enum class Mode { multiplier, kernel };
  enum class Normalization { unnormalized, classical };
  int direction = 1;  // 1-based coordinate j
  Mode mode = Mode::multiplier;
  Normalization normalization = Normalization::unnormalized;
};

// Kernel K_j(y) = c * y_j / |y|^{n+1}, with c = 1 or the classical constant.
double riesz_kernel(std::span<const double> y, int direction, RieszSpec::Normalization norm);

GridFunction riesz_apply(const RieszSpec& spec, const GridFunction& f);

// Matrix over the cell basis; the operator acts on the vector of cell values.
struct DenseOperator {
  Eigen::MatrixXd matrix;
  std::string source_weight = "1";
  std::string target_weight = "1";

  GridFunction apply(const GridFunction& f) const;
};

DenseOperator riesz_matrix(const TorusGrid& grid, const RieszSpec& spec);
DenseOperator commutator_matrix(const GridFunction& b, const RieszSpec& spec);
DenseOperator weighted_conjugate(const DenseOperator& t, const Weight& lambda, const Weight& mu);
DenseOperator weighted_conjugate_inverse(const DenseOperator& t, const Weight& lambda, const Weight& mu);
// Materialises any linear map on grid functions column by column.
DenseOperator materialize(const TorusGrid& grid, const std::function<GridFunction(const GridFunction&)>& op);

struct ShiftSpec {
  enum class Child { smallest_index, position };
  Child child = Child::smallest_index;
  unsigned position = 0;              // child position bits when child == position
  std::vector<int> signature_map;     // cancellative index -> index, or -1 to drop; empty = identity

  const DyadicCube& select(const DyadicCube& q, const DyadicSystem& system) const;
  int map_signature(unsigned eps) const;
};

GridFunction haar_shift_apply(const ShiftSpec& shift, const GridFunction& f, const DyadicSystem& system);
HaarCoefficients haar_shift_coefficients(const ShiftSpec& shift, const HaarCoefficients& c,
                                         const DyadicSystem& system);

enum class Paraproduct { pi, pi_star, gamma, remainder };

GridFunction paraproduct_apply(Paraproduct kind, const GridFunction& b, const GridFunction& f,
                               const DyadicSystem& system, const ShiftSpec* shift = nullptr);

// L2 norm of [b, Sh] f minus its paraproduct expansion.
double decomposition_residual(const GridFunction& b, const GridFunction& f, const ShiftSpec& shift,
                              const DyadicSystem& system);

struct SignCellPair {
  DyadicCube first;   // lower in the chosen coordinate
  DyadicCube second;
  bool sign_constant = false;
  double min_kernel_times_volume = 0.0;  // min |K_j(x1 - x2)| |Q| over cell pairs
};

struct SignCellFrame {
  DyadicCube cube;
  int direction = 1;
  std::vector<SignCellPair> pairs;
  std::vector<GridFunction> g;  // 2^{(k+1)n/2} (1_{P1} - 1_{P2})
  std::vector<GridFunction> G;  // mu^{1/2} 1_{P2} / mu(Q)^{1/2}
  std::vector<GridFunction> H;  // lambda^{-1/2} 1_{P1} / lambda^{-1}(Q)^{1/2}
  bool all_sign_constant = false;
  double size_constant = 0.0;   // min over pairs of min_kernel_times_volume
  int span_rank = 0;            // rank of the g's as vectors over grandchildren
};

SignCellFrame sign_cell_frame(const DyadicCube& q, int direction, const WeightPair& weights,
                              const DyadicSystem& system);

// Cube-indexed function family for Rochberg-Semmes style checks.
struct FamilyMember {
  DyadicCube cube;
  GridFunction f;
};
using Family = std::vector<FamilyMember>;

enum class NwoKind { sufficiency_g, sufficiency_h, necessity_g, necessity_h };
std::string to_string(NwoKind k);
// The weight whose reverse Holder exponent governs the family's integrability.
const Weight& nwo_weight(NwoKind kind, const WeightPair& w);
Family nwo_family(NwoKind kind, const WeightPair& weights, std::span<const DyadicSystem> systems);

struct WhitneyCoefficients {
  int max_frequency = 0;
  int n = 0;
  double enlargement = 0.0;            // epsilon'
  std::vector<Complex> upsilon;        // indexed by l in [-max, max]^{2n}, row-major
  double reconstruction_error = 0.0;   // relative L2 on Q x R
  double zero_mode_average = 0.0;      // direct mean of the windowed kernel

  Complex at(std::span<const int> l) const;
  // Magnitudes of all coefficients with |l|_inf equal to the shell radius.
  std::vector<double> shell(int radius) const;
};

WhitneyCoefficients whitney_kernel_coefficients(const WhitneyPair& pair, int direction, int max_frequency,
                                                double enlargement = 1.0, int samples = 32,
                                                RieszSpec::Normalization norm = RieszSpec::Normalization::unnormalized);

}  // namespace wcomm
