#include "wcomm/schatten.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "wcomm/seq_norms.hpp"

extern "C" void openblas_set_num_threads(int);

namespace wcomm {

namespace {

// Every decomposition runs single-threaded so results do not depend on scheduling.
void pin_blas_threads() {
  static std::once_flag once;
  std::call_once(once, [] { openblas_set_num_threads(1); });
}

}  // namespace

SingularSpectrum singular_values(const Eigen::MatrixXd& a) {
  if (!a.allFinite()) throw std::invalid_argument("non-finite matrix entries");
  pin_blas_threads();
  SingularSpectrum s;
  s.rows = a.rows();
  s.cols = a.cols();
  const Eigen::Index k = std::min(a.rows(), a.cols());
  s.values.assign(static_cast<std::size_t>(k), 0.0);
  if (k == 0) return s;
  Eigen::MatrixXd work = a;
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  const lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', m, n, work.data(), m, s.values.data(),
                                         nullptr, 1, nullptr, 1);
  if (info != 0) throw std::runtime_error("dgesdd failed to converge");
  std::sort(s.values.begin(), s.values.end(), std::greater<>());
  const double cut = kNumericalZero * s.values.front();
  s.numerical_rank = static_cast<std::size_t>(
      std::count_if(s.values.begin(), s.values.end(), [&](double v) { return v > cut; }));
  return s;
}

SingularSpectrum singular_values(const DenseOperator& t) { return singular_values(t.matrix); }

double schatten_lorentz_norm(const SingularSpectrum& s, double p, double q) {
  if (std::isinf(q)) {
    std::span<const double> head(s.values.data(), s.numerical_rank);
    return lorentz_norm(head, p, q);
  }
  return lorentz_norm(std::span<const double>(s.values), p, q);
}

NwoResult nwo_ratio(const Family& family, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("exponent must be positive");
  NwoResult out;
  for (const auto& member : family) {
    const TorusGrid& g = member.f.grid();
    double acc = 0.0;
    for (std::size_t c = 0; c < member.f.size(); ++c) {
      const double v = member.f[c];
      if (!member.cube.contains_cell(g.unflatten(c))) {
        if (std::abs(v) > 1e-14) throw std::invalid_argument("family member leaves its cube");
        continue;
      }
      acc += std::pow(std::abs(v), r);
    }
    const double norm = std::pow(acc * g.cell_volume(), 1.0 / r);
    const double ratio = norm / std::pow(member.cube.volume(), 1.0 / r - 0.5);
    if (ratio > out.ratio) {
      out.ratio = ratio;
      out.worst = member.cube;
    }
  }
  return out;
}

double rs_pairing_sum(const DenseOperator& t, std::span<const GridFunction> e,
                      std::span<const GridFunction> f, double p, double q) {
  if (e.size() != f.size()) throw std::invalid_argument("frames have different index sets");
  std::vector<double> pairs;
  pairs.reserve(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) pairs.push_back(std::abs(inner(t.apply(e[i]), f[i])));
  return lorentz_norm(std::span<const double>(pairs), p, q);
}

}  // namespace wcomm
