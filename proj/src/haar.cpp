#include "wcomm/haar.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace wcomm {

int Signature::sign_on_child(unsigned t) const {
  const unsigned mask = (1u << n) - 1;
  return (std::popcount(~bits & t & mask) % 2 == 0) ? 1 : -1;
}

GridFunction haar_function(const DyadicCube& q, Signature eps, const TorusGrid& grid) {
  if (eps.n != grid.dim()) throw std::invalid_argument("signature dimension mismatch");
  const int n = grid.dim();
  const int N = grid.side();
  const double amp = 1.0 / std::sqrt(q.volume());
  GridFunction out(grid);
  Region(grid, {q.box()}).for_each_cell([&](std::size_t c) {
    const IVec cell = grid.unflatten(c);
    unsigned t = 0;
    for (int i = 0; i < n; ++i) {
      const int local = ((cell[i] - q.anchor[i]) % N + N) % N;
      if (2 * local >= q.side) t |= 1u << (n - 1 - i);
    }
    out[c] = amp * eps.sign_on_child(t);
  });
  return out;
}

GridFunction indicator(const DyadicCube& q, const TorusGrid& grid) {
  GridFunction out(grid);
  Region(grid, {q.box()}).for_each_cell([&](std::size_t c) { out[c] = 1.0; });
  return out;
}

HaarCoefficients::HaarCoefficients(const DyadicSystem& system, double coarse,
                                   std::vector<double> coeffs, GridFunction fine)
    : omega_(system.omega()),
      n_(system.grid().dim()),
      L_(system.depth()),
      coarse_(coarse),
      coeffs_(std::move(coeffs)),
      fine_(std::move(fine)) {
  const std::size_t per = static_cast<std::size_t>(Signature::cancellative_count(n_));
  level_offset_.resize(L_ + 1);
  std::size_t total = 0;
  for (int k = 0; k < L_; ++k) {
    level_offset_[k] = total;
    total += system.count_at(k) * per;
  }
  level_offset_[L_] = total;
  if (coeffs_.size() != total) throw std::invalid_argument("coefficient count mismatch");
}

HaarCoefficients HaarCoefficients::zero(const DyadicSystem& system) {
  std::size_t total = 0;
  for (int k = 0; k < system.depth(); ++k)
    total += system.count_at(k) * static_cast<std::size_t>(Signature::cancellative_count(system.grid().dim()));
  return HaarCoefficients(system, 0.0, std::vector<double>(total, 0.0), GridFunction(system.grid()));
}

std::size_t HaarCoefficients::slot(int level, std::int64_t m, unsigned eps) const {
  const unsigned per = static_cast<unsigned>(Signature::cancellative_count(n_));
  if (level < 0 || level >= L_ || eps >= per) throw std::out_of_range("Haar coefficient index");
  return level_offset_[level] + static_cast<std::size_t>(m) * per + eps;
}

std::span<const double> HaarCoefficients::block(int level, std::int64_t m) const {
  return std::span<const double>(coeffs_).subspan(slot(level, m, 0),
                                                  static_cast<std::size_t>(Signature::cancellative_count(n_)));
}

double HaarCoefficients::squared_norm() const {
  double s = coarse_ * coarse_;
  for (double c : coeffs_) s += c * c;
  return s + inner(fine_, fine_);
}

std::vector<std::vector<double>> cube_averages(const GridFunction& b, const DyadicSystem& system) {
  if (!(b.grid() == system.grid())) throw std::invalid_argument("grid mismatch");
  const int L = system.depth();
  const unsigned nchild = 1u << system.grid().dim();
  std::vector<std::vector<double>> avg(L + 1);
  avg[L].assign(system.count_at(L), 0.0);
  const auto own = system.owners(L);
  for (std::size_t c = 0; c < b.size(); ++c) avg[L][own[c]] += b[c];
  const double cells_per_cube = static_cast<double>(b.size()) / system.count_at(L);
  for (double& v : avg[L]) v /= cells_per_cube;
  for (int k = L - 1; k >= 0; --k) {
    avg[k].assign(system.count_at(k), 0.0);
    for (const auto& q : system.level_cubes(k)) {
      double s = 0.0;
      for (unsigned t = 0; t < nchild; ++t) s += avg[k + 1][system.child_at(q, t).flat_m];
      avg[k][q.flat_m] = s / nchild;
    }
  }
  return avg;
}

HaarCoefficients analyze(const GridFunction& b, const DyadicSystem& system) {
  if (!all_finite(b)) throw std::invalid_argument("non-finite input to analyze");
  const int n = system.grid().dim();
  const int L = system.depth();
  const unsigned nchild = 1u << n;
  const unsigned per = static_cast<unsigned>(Signature::cancellative_count(n));
  const auto avg = cube_averages(b, system);

  HaarCoefficients out = HaarCoefficients::zero(system);
  out.coarse() = avg[0][0];
  std::vector<double> child(nchild);
  for (int k = 0; k < L; ++k) {
    for (const auto& q : system.level_cubes(k)) {
      for (unsigned t = 0; t < nchild; ++t) child[t] = avg[k + 1][system.child_at(q, t).flat_m];
      const double scale = std::sqrt(q.volume()) / nchild;
      for (unsigned e = 0; e < per; ++e) {
        const Signature eps{e, n};
        double s = 0.0;
        for (unsigned t = 0; t < nchild; ++t) s += eps.sign_on_child(t) * child[t];
        out.at(k, q.flat_m, e) = scale * s;
      }
    }
  }
  GridFunction fine = b;
  const auto own = system.owners(L);
  for (std::size_t c = 0; c < b.size(); ++c) fine[c] -= avg[L][own[c]];
  out.fine() = std::move(fine);
  return out;
}

GridFunction synthesize(const HaarCoefficients& coeffs, const DyadicSystem& system) {
  if (coeffs.omega() != system.omega() || coeffs.depth() != system.depth() ||
      coeffs.dim() != system.grid().dim())
    throw std::invalid_argument("coefficients belong to a different system");
  const int n = system.grid().dim();
  const int L = system.depth();
  const unsigned nchild = 1u << n;
  const unsigned per = static_cast<unsigned>(Signature::cancellative_count(n));

  std::vector<double> level{coeffs.coarse()};
  for (int k = 0; k < L; ++k) {
    std::vector<double> next(system.count_at(k + 1), 0.0);
    for (const auto& q : system.level_cubes(k)) {
      const double amp = 1.0 / std::sqrt(q.volume());
      const auto block = coeffs.block(k, q.flat_m);
      for (unsigned t = 0; t < nchild; ++t) {
        double v = level[q.flat_m];
        for (unsigned e = 0; e < per; ++e) v += block[e] * amp * Signature{e, n}.sign_on_child(t);
        next[system.child_at(q, t).flat_m] = v;
      }
    }
    level = std::move(next);
  }
  GridFunction out = coeffs.fine();
  const auto own = system.owners(L);
  for (std::size_t c = 0; c < out.size(); ++c) out[c] += level[own[c]];
  return out;
}

GridFunction expectation(const GridFunction& b, const DyadicSystem& system, int level) {
  if (level < 0 || level > system.depth()) throw std::out_of_range("expectation level out of range");
  const auto avg = cube_averages(b, system);
  return expand_level(avg[level], level, system);
}

GridFunction expand_level(const std::vector<double>& values, int level, const DyadicSystem& system) {
  if (values.size() != system.count_at(level)) throw std::invalid_argument("level data size mismatch");
  GridFunction out(system.grid());
  const auto own = system.owners(level);
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = values[own[c]];
  return out;
}

GridFunction martingale_difference(const GridFunction& b, const DyadicCube& q,
                                   const DyadicSystem& system) {
  if (q.level >= system.depth()) throw std::invalid_argument("cube is at maximal depth");
  const auto own_next = system.owners(q.level + 1);
  const auto cells = system.cells(q);
  std::vector<double> child_sum(system.count_at(q.level + 1), 0.0);
  double total = 0.0;
  for (std::size_t c : cells) {
    child_sum[own_next[c]] += b[c];
    total += b[c];
  }
  const double mean = total / static_cast<double>(cells.size());
  const double per_child = static_cast<double>(cells.size()) / (1u << system.grid().dim());
  GridFunction out(system.grid());
  for (std::size_t c : cells) out[c] = child_sum[own_next[c]] / per_child - mean;
  return out;
}

double average_from_ancestors(const HaarCoefficients& coeffs, const DyadicCube& q,
                              const DyadicSystem& system) {
  const int n = system.grid().dim();
  const unsigned per = static_cast<unsigned>(Signature::cancellative_count(n));
  double v = coeffs.coarse();
  DyadicCube cur = q;
  std::vector<DyadicCube> chain;
  while (cur.level > 0) {
    chain.push_back(cur);
    cur = system.parent(cur);
  }
  // chain holds q and its ancestors below level 0, finest first.
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const DyadicCube& parent = system.parent(*it);
    unsigned t = 0;
    for (unsigned pos = 0; pos < (1u << n); ++pos)
      if (system.child_at(parent, pos) == *it) t = pos;
    const double amp = 1.0 / std::sqrt(parent.volume());
    for (unsigned e = 0; e < per; ++e)
      v += coeffs.at(parent.level, parent.flat_m, e) * amp * Signature{e, n}.sign_on_child(t);
  }
  return v;
}

}  // namespace wcomm
