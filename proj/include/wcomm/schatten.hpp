#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "wcomm/operators.hpp"

namespace wcomm {

inline constexpr double kNumericalZero = 1e-12;

struct SingularSpectrum {
  std::vector<double> values;  // non-increasing
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::size_t numerical_rank = 0;  // count of values above kNumericalZero * s_1
};

SingularSpectrum singular_values(const Eigen::MatrixXd& a);
SingularSpectrum singular_values(const DenseOperator& t);

// Lorentz norm of the spectrum; the weak norm skips numerically zero values.
double schatten_lorentz_norm(const SingularSpectrum& s, double p, double q);

struct NwoResult {
  double ratio = 0.0;
  DyadicCube worst;
};

// sup of ||e_Q||_r / |Q|^{1/r - 1/2} over the family.
NwoResult nwo_ratio(const Family& family, double r);

// Lorentz norm of the pairings <T e_Q, f_Q>.
double rs_pairing_sum(const DenseOperator& t, std::span<const GridFunction> e,
                      std::span<const GridFunction> f, double p, double q);

}  // namespace wcomm
