#include "wcomm/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace wcomm {

namespace {

void check_direction(int j, int n) {
  if (j < 1 || j > n) throw std::invalid_argument("Riesz direction out of range");
}

double classical_constant(int n) {
  return std::tgamma(0.5 * (n + 1)) / std::pow(std::numbers::pi, 0.5 * (n + 1));
}

// Kernel values indexed by the wrapped displacement cell, h^n folded in.
std::vector<double> kernel_column(const TorusGrid& g, const RieszSpec& spec) {
  const int n = g.dim();
  const int N = g.side();
  std::vector<double> k(g.cell_count(), 0.0);
  std::array<double, kMaxDim> y{};
  for (std::size_t c = 1; c < k.size(); ++c) {
    const IVec d = g.unflatten(c);
    if (d[spec.direction - 1] == N / 2) continue;  // ambiguous minimal image in direction j
    for (int i = 0; i < n; ++i) y[i] = g.min_image(d[i]) * g.h();
    k[c] = riesz_kernel(std::span<const double>(y.data(), n), spec.direction, spec.normalization) *
           g.cell_volume();
  }
  return k;
}

Complex riesz_symbol(const IVec& xi, int n, int N, int j) {
  double r2 = 0.0;
  for (int i = 0; i < n; ++i) r2 += static_cast<double>(xi[i]) * xi[i];
  if (r2 == 0.0 || xi[j - 1] == N / 2) return 0.0;
  return Complex(0.0, -xi[j - 1] / std::sqrt(r2));
}

}  // namespace

double riesz_kernel(std::span<const double> y, int direction, RieszSpec::Normalization norm) {
  const int n = static_cast<int>(y.size());
  check_direction(direction, n);
  double r2 = 0.0;
  for (double v : y) r2 += v * v;
  if (r2 == 0.0) return 0.0;
  double k = y[direction - 1] / std::pow(r2, 0.5 * (n + 1));
  if (norm == RieszSpec::Normalization::classical) k *= classical_constant(n);
  return k;
}

GridFunction riesz_apply(const RieszSpec& spec, const GridFunction& f) {
  const TorusGrid& g = f.grid();
  check_direction(spec.direction, g.dim());
  if (!all_finite(f)) throw std::invalid_argument("non-finite input to riesz_apply");
  if (spec.mode == RieszSpec::Mode::multiplier)
    return apply_multiplier(f, [&](const IVec& xi) { return riesz_symbol(xi, g.dim(), g.side(), spec.direction); });
  const auto k = kernel_column(g, spec);
  GridFunction out = circular_convolution(f, k);
  // circular_convolution folds h^n in again; the column already carries it.
  out *= 1.0 / g.cell_volume();
  return out;
}

GridFunction DenseOperator::apply(const GridFunction& f) const {
  if (static_cast<Eigen::Index>(f.size()) != matrix.cols()) throw std::invalid_argument("dimension mismatch");
  Eigen::Map<const Eigen::VectorXd> x(f.values().data(), static_cast<Eigen::Index>(f.size()));
  Eigen::VectorXd y = matrix * x;
  return GridFunction(f.grid(), std::vector<double>(y.data(), y.data() + y.size()));
}

DenseOperator riesz_matrix(const TorusGrid& g, const RieszSpec& spec) {
  check_direction(spec.direction, g.dim());
  std::vector<double> column;
  if (spec.mode == RieszSpec::Mode::multiplier) {
    GridFunction delta(g);
    delta[0] = 1.0;
    const GridFunction r = riesz_apply(spec, delta);
    column.assign(r.values().begin(), r.values().end());
  } else {
    column = kernel_column(g, spec);
  }
  const int n = g.dim();
  const int N = g.side();
  const auto size = static_cast<Eigen::Index>(g.cell_count());
  std::vector<IVec> idx(g.cell_count());
  for (std::size_t c = 0; c < idx.size(); ++c) idx[c] = g.unflatten(c);
  DenseOperator op;
  op.matrix.resize(size, size);
  for (Eigen::Index y = 0; y < size; ++y)
    for (Eigen::Index x = 0; x < size; ++x) {
      std::size_t flat = 0;
      for (int i = 0; i < n; ++i) flat = flat * N + static_cast<std::size_t>((idx[x][i] - idx[y][i] + N) % N);
      op.matrix(x, y) = column[flat];
    }
  return op;
}

DenseOperator commutator_matrix(const GridFunction& b, const RieszSpec& spec) {
  DenseOperator op = riesz_matrix(b.grid(), spec);
  const auto size = op.matrix.rows();
  for (Eigen::Index y = 0; y < size; ++y)
    for (Eigen::Index x = 0; x < size; ++x) op.matrix(x, y) *= b[x] - b[y];
  return op;
}

DenseOperator weighted_conjugate(const DenseOperator& t, const Weight& lambda, const Weight& mu) {
  if (!(lambda.grid() == mu.grid())) throw std::invalid_argument("grid mismatch");
  const auto size = static_cast<Eigen::Index>(lambda.values().size());
  if (t.matrix.rows() != size || t.matrix.cols() != size) throw std::invalid_argument("dimension mismatch");
  Eigen::VectorXd left(size), right(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    left[i] = std::sqrt(lambda[i]);
    right[i] = 1.0 / std::sqrt(mu[i]);
  }
  DenseOperator out;
  out.matrix = left.asDiagonal() * t.matrix * right.asDiagonal();
  out.source_weight = "mu";
  out.target_weight = "lambda";
  return out;
}

DenseOperator weighted_conjugate_inverse(const DenseOperator& t, const Weight& lambda, const Weight& mu) {
  const auto size = static_cast<Eigen::Index>(lambda.values().size());
  Eigen::VectorXd left(size), right(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    left[i] = 1.0 / std::sqrt(lambda[i]);
    right[i] = std::sqrt(mu[i]);
  }
  DenseOperator out;
  out.matrix = left.asDiagonal() * t.matrix * right.asDiagonal();
  return out;
}

DenseOperator materialize(const TorusGrid& g, const std::function<GridFunction(const GridFunction&)>& op) {
  const auto size = static_cast<Eigen::Index>(g.cell_count());
  DenseOperator out;
  out.matrix.resize(size, size);
  GridFunction e(g);
  for (Eigen::Index y = 0; y < size; ++y) {
    e[y] = 1.0;
    const GridFunction col = op(e);
    for (Eigen::Index x = 0; x < size; ++x) out.matrix(x, y) = col[x];
    e[y] = 0.0;
  }
  return out;
}

const DyadicCube& ShiftSpec::select(const DyadicCube& q, const DyadicSystem& system) const {
  if (child == Child::position) return system.child_at(q, position);
  const DyadicCube* best = nullptr;
  for (unsigned t = 0; t < (1u << system.grid().dim()); ++t) {
    const DyadicCube& c = system.child_at(q, t);
    if (!best || c.flat_m < best->flat_m) best = &c;
  }
  return *best;
}

int ShiftSpec::map_signature(unsigned eps) const {
  if (signature_map.empty()) return static_cast<int>(eps);
  if (eps >= signature_map.size()) throw std::out_of_range("signature map is too short");
  return signature_map[eps];
}

HaarCoefficients haar_shift_coefficients(const ShiftSpec& shift, const HaarCoefficients& c,
                                         const DyadicSystem& system) {
  const int n = system.grid().dim();
  const unsigned per = static_cast<unsigned>(Signature::cancellative_count(n));
  HaarCoefficients out = HaarCoefficients::zero(system);
  // Targets at level L carry no Haar functions, so the last Haar level maps to zero.
  for (int k = 0; k + 1 < system.depth(); ++k)
    for (const auto& q : system.level_cubes(k)) {
      const DyadicCube& target = shift.select(q, system);
      for (unsigned e = 0; e < per; ++e) {
        const int te = shift.map_signature(e);
        if (te < 0) continue;
        out.coeff(target, static_cast<unsigned>(te)) += c.coeff(q, e);
      }
    }
  return out;
}

GridFunction haar_shift_apply(const ShiftSpec& shift, const GridFunction& f, const DyadicSystem& system) {
  return synthesize(haar_shift_coefficients(shift, analyze(f, system), system), system);
}

namespace {

// Sum over levels of piecewise-constant data, expanded to cells.
GridFunction collapse(const std::vector<std::vector<double>>& levels, const DyadicSystem& system) {
  GridFunction out(system.grid());
  for (int k = 0; k <= system.depth(); ++k) {
    if (levels[k].empty()) continue;
    const auto own = system.owners(k);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += levels[k][own[c]];
  }
  return out;
}

}  // namespace

GridFunction paraproduct_apply(Paraproduct kind, const GridFunction& b, const GridFunction& f,
                               const DyadicSystem& system, const ShiftSpec* shift) {
  const int n = system.grid().dim();
  const int L = system.depth();
  const unsigned per = static_cast<unsigned>(Signature::cancellative_count(n));
  const unsigned nchild = 1u << n;

  if (kind == Paraproduct::remainder) {
    if (!shift) throw std::invalid_argument("remainder needs a shift");
    const HaarCoefficients fc = analyze(f, system);
    const auto bavg = cube_averages(b, system);
    HaarCoefficients out = HaarCoefficients::zero(system);
    for (int k = 0; k + 1 < L; ++k)
      for (const auto& q : system.level_cubes(k)) {
        const DyadicCube& target = shift->select(q, system);
        const double jump = bavg[k + 1][target.flat_m] - bavg[k][q.flat_m];
        for (unsigned e = 0; e < per; ++e) {
          const int te = shift->map_signature(e);
          if (te >= 0) out.coeff(target, static_cast<unsigned>(te)) += fc.coeff(q, e) * jump;
        }
      }
    return synthesize(out, system);
  }

  const HaarCoefficients bc = analyze(b, system);
  const HaarCoefficients fc = kind == Paraproduct::pi ? HaarCoefficients::zero(system) : analyze(f, system);
  const auto favg = kind == Paraproduct::pi ? cube_averages(f, system) : std::vector<std::vector<double>>{};
  std::vector<std::vector<double>> levels(L + 1);
  for (int k = 0; k <= L; ++k) levels[k].assign(system.count_at(k), 0.0);

  for (int k = 0; k < L; ++k)
    for (const auto& q : system.level_cubes(k)) {
      const auto bb = bc.block(k, q.flat_m);
      const double vol = q.volume();
      if (kind == Paraproduct::pi_star) {
        const auto fb = fc.block(k, q.flat_m);
        double s = 0.0;
        for (unsigned e = 0; e < per; ++e) s += bb[e] * fb[e];
        levels[k][q.flat_m] += s / vol;
        continue;
      }
      for (unsigned t = 0; t < nchild; ++t) {
        double v = 0.0;
        if (kind == Paraproduct::pi) {
          const double amp = favg[k][q.flat_m] / std::sqrt(vol);
          for (unsigned e = 0; e < per; ++e) v += bb[e] * amp * Signature{e, n}.sign_on_child(t);
        } else {
          const auto fb = fc.block(k, q.flat_m);
          for (unsigned e = 0; e < per; ++e)
            for (unsigned h = 0; h < per; ++h)
              if (e != h)
                v += bb[e] * fb[h] * Signature{e, n}.sign_on_child(t) * Signature{h, n}.sign_on_child(t);
          v /= vol;
        }
        levels[k + 1][system.child_at(q, t).flat_m] += v;
      }
    }
  return collapse(levels, system);
}

double decomposition_residual(const GridFunction& b, const GridFunction& f, const ShiftSpec& shift,
                              const DyadicSystem& system) {
  auto shifted = [&](const GridFunction& g) { return haar_shift_apply(shift, g, system); };
  auto expand = [&](const GridFunction& g) {
    return paraproduct_apply(Paraproduct::pi, b, g, system) +
           paraproduct_apply(Paraproduct::pi_star, b, g, system) +
           paraproduct_apply(Paraproduct::gamma, b, g, system);
  };
  const GridFunction sf = shifted(f);
  const GridFunction lhs = pointwise_product(b, sf) - shifted(pointwise_product(b, f));
  const GridFunction rhs = expand(sf) - shifted(expand(f)) +
                           paraproduct_apply(Paraproduct::remainder, b, f, system, &shift);
  return l2_norm(lhs - rhs);
}

SignCellFrame sign_cell_frame(const DyadicCube& q, int direction, const WeightPair& weights,
                              const DyadicSystem& system) {
  const TorusGrid& g = system.grid();
  const int n = g.dim();
  check_direction(direction, n);
  if (q.level > system.depth() - 2) throw std::invalid_argument("cube too fine for grandchildren");
  const int j = direction - 1;
  const unsigned nchild = 1u << n;

  // Grandchildren with local coordinates in {0,1,2,3}^n.
  struct Grand {
    DyadicCube cube;
    IVec local{};
  };
  std::vector<Grand> grand;
  for (unsigned t1 = 0; t1 < nchild; ++t1) {
    const DyadicCube& c = system.child_at(q, t1);
    for (unsigned t2 = 0; t2 < nchild; ++t2) {
      Grand gc{system.child_at(c, t2), {}};
      for (int i = 0; i < n; ++i) {
        const int b1 = (t1 >> (n - 1 - i)) & 1u;
        const int b2 = (t2 >> (n - 1 - i)) & 1u;
        gc.local[i] = 2 * b1 + b2;
      }
      grand.push_back(gc);
    }
  }
  std::sort(grand.begin(), grand.end(), [&](const Grand& a, const Grand& b) {
    return std::lexicographical_compare(a.local.begin(), a.local.begin() + n, b.local.begin(), b.local.begin() + n);
  });

  SignCellFrame frame;
  frame.cube = q;
  frame.direction = direction;
  frame.all_sign_constant = true;
  frame.size_constant = std::numeric_limits<double>::infinity();
  const int gs = q.side / 4;
  const double qvol = q.volume();
  const double amp = std::pow(2.0, 0.5 * (q.level + 1) * n);
  const double mu_q = std::sqrt(weights.mu.mass(q));
  const double li_q = std::sqrt(weights.lambda_inv.mass(q));
  Eigen::MatrixXd span_rows(0, static_cast<Eigen::Index>(grand.size()));
  std::vector<Eigen::VectorXd> rows;

  for (std::size_t a = 0; a < grand.size(); ++a)
    for (std::size_t b = 0; b < grand.size(); ++b) {
      if (grand[b].local[j] - grand[a].local[j] < 2) continue;
      SignCellPair pair{grand[a].cube, grand[b].cube, true, std::numeric_limits<double>::infinity()};
      // Displacements x1 - x2 between cell pairs fill a box of (2 gs - 1)^n vectors.
      IVec base{};
      for (int i = 0; i < n; ++i) base[i] = (grand[a].local[i] - grand[b].local[i]) * gs;
      int sign = 0;
      IVec off{};
      std::array<double, kMaxDim> y{};
      while (true) {
        bool ambiguous = false;
        for (int i = 0; i < n; ++i) {
          const int d = g.min_image(base[i] + off[i] - (gs - 1));
          if (i == j && d == g.side() / 2) ambiguous = true;
          y[i] = d * g.h();
        }
        const double kv = ambiguous ? 0.0 : riesz_kernel(std::span<const double>(y.data(), n), direction,
                                                         RieszSpec::Normalization::unnormalized);
        const int s = kv > 0 ? 1 : (kv < 0 ? -1 : 0);
        if (s == 0 || (sign != 0 && s != sign)) pair.sign_constant = false;
        if (sign == 0) sign = s;
        pair.min_kernel_times_volume = std::min(pair.min_kernel_times_volume, std::abs(kv) * qvol);
        int axis = n - 1;
        while (axis >= 0) {
          if (++off[axis] < 2 * gs - 1) break;
          off[axis] = 0;
          --axis;
        }
        if (axis < 0) break;
      }
      frame.all_sign_constant = frame.all_sign_constant && pair.sign_constant;
      frame.size_constant = std::min(frame.size_constant, pair.min_kernel_times_volume);

      GridFunction gf = indicator(pair.first, g) - indicator(pair.second, g);
      gf *= amp;
      GridFunction G(g), H(g);
      for (std::size_t c : system.cells(pair.second)) G[c] = std::sqrt(weights.mu[c]) / mu_q;
      for (std::size_t c : system.cells(pair.first)) H[c] = std::sqrt(weights.lambda_inv[c]) / li_q;
      frame.g.push_back(std::move(gf));
      frame.G.push_back(std::move(G));
      frame.H.push_back(std::move(H));
      frame.pairs.push_back(pair);

      Eigen::VectorXd row = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grand.size()));
      row[static_cast<Eigen::Index>(a)] = 1.0;
      row[static_cast<Eigen::Index>(b)] = -1.0;
      rows.push_back(row);
    }
  span_rows.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(grand.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) span_rows.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
  frame.span_rank = rows.empty() ? 0 : static_cast<int>(Eigen::FullPivLU<Eigen::MatrixXd>(span_rows).rank());
  return frame;
}

std::string to_string(NwoKind k) {
  switch (k) {
    case NwoKind::sufficiency_g: return "G";
    case NwoKind::sufficiency_h: return "H";
    case NwoKind::necessity_g: return "G'";
    case NwoKind::necessity_h: return "H'";
  }
  return "unknown";
}

const Weight& nwo_weight(NwoKind kind, const WeightPair& w) {
  switch (kind) {
    case NwoKind::sufficiency_g: return w.lambda;
    case NwoKind::sufficiency_h: return w.mu_inv;
    case NwoKind::necessity_g: return w.mu;
    case NwoKind::necessity_h: return w.lambda_inv;
  }
  throw std::invalid_argument("unknown family");
}

Family nwo_family(NwoKind kind, const WeightPair& w, std::span<const DyadicSystem> systems) {
  const Weight& base = nwo_weight(kind, w);
  const bool haar = kind == NwoKind::sufficiency_g || kind == NwoKind::necessity_h;
  Family out;
  for (const auto& sys : systems) {
    const TorusGrid& g = sys.grid();
    const int n = g.dim();
    for (const auto& q : sys.all()) {
      const double norm = std::sqrt(base.mass(q));
      const auto cells = sys.cells(q);
      if (!haar) {
        GridFunction f(g);
        for (std::size_t c : cells) f[c] = std::sqrt(base[c]) / norm;
        out.push_back({q, std::move(f)});
        continue;
      }
      if (q.level >= sys.depth()) continue;
      for (unsigned e = 0; e < static_cast<unsigned>(Signature::cancellative_count(n)); ++e) {
        GridFunction f = haar_function(q, Signature{e, n}, g);
        const double scale = std::sqrt(q.volume()) / norm;
        for (std::size_t c : cells) f[c] *= std::sqrt(base[c]) * scale;
        out.push_back({q, std::move(f)});
      }
    }
  }
  return out;
}

}  // namespace wcomm
