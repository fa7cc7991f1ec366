#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "wcomm/operators.hpp"

using namespace wcomm;

namespace {

GridFunction random_function(const TorusGrid& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal;
  GridFunction f(g);
  for (std::size_t c = 0; c < f.size(); ++c) f[c] = normal(rng);
  return f;
}

// Random data constant on the finest dyadic cubes, so the Haar expansion spans it.
GridFunction band_limited(const DyadicSystem& sys, unsigned seed) {
  return expectation(random_function(sys.grid(), seed), sys, sys.depth());
}

double max_abs(const GridFunction& f) {
  double m = 0.0;
  for (std::size_t c = 0; c < f.size(); ++c) m = std::max(m, std::abs(f[c]));
  return m;
}

WeightPair power_pair(const TorusGrid& g) {
  return WeightPair::from(make_weight(g, WeightSpec::power(0.5, {0.0, 0.0})),
                          make_weight(g, WeightSpec::power(-0.5, {0.0, 0.0})));
}

std::vector<ShiftSpec> shift_specs() {
  ShiftSpec first;
  ShiftSpec second;
  second.child = ShiftSpec::Child::position;
  second.position = 0b10;
  second.signature_map = {2, -1, 0};
  return {first, second};
}

}  // namespace

TEST_CASE("Riesz multiplier") {
  const TorusGrid g(2, 2);
  for (int dir : {1, 2}) {
    const RieszSpec spec{dir};
    for (double v : riesz_apply(spec, GridFunction(g, 2.0)).values()) CHECK(std::abs(v) <= 1e-14);
    // cos(2 pi xi.x) maps to (xi_j/|xi|) sin(2 pi xi.x).
    const int xi[] = {3, -2};
    const double a = xi[dir - 1] / std::hypot(3.0, 2.0);
    auto phase = [&](std::span<const double> x) { return 2 * std::numbers::pi * (xi[0] * x[0] + xi[1] * x[1]); };
    const GridFunction c = GridFunction::from(g, [&](std::span<const double> x) { return std::cos(phase(x)); });
    const GridFunction s = GridFunction::from(g, [&](std::span<const double> x) { return a * std::sin(phase(x)); });
    CHECK(max_abs(riesz_apply(spec, c) - s) <= 1e-12);
  }
  CHECK_THROWS_AS(riesz_apply(RieszSpec{3}, GridFunction(g)), std::invalid_argument);
  CHECK_THROWS_AS(riesz_apply(RieszSpec{0}, GridFunction(g)), std::invalid_argument);
}

TEST_CASE("Riesz matrices are skew contractions") {
  const TorusGrid g(2, 1);
  for (auto mode : {RieszSpec::Mode::multiplier, RieszSpec::Mode::kernel}) {
    const DenseOperator r = riesz_matrix(g, RieszSpec{1, mode});
    CHECK((r.matrix + r.matrix.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  }
  const DenseOperator m = riesz_matrix(g, RieszSpec{2});
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m.matrix);
  CHECK(svd.singularValues()[0] == doctest::Approx(1.0).epsilon(1e-12));

  const TorusGrid g3(2, 3);
  for (unsigned t = 0; t < 5; ++t) {
    const GridFunction f = random_function(g3, 80 + t);
    const double r1 = l2_norm(riesz_apply(RieszSpec{1}, f));
    const double r2 = l2_norm(riesz_apply(RieszSpec{2}, f));
    CHECK(r1 * r1 + r2 * r2 <= inner(f, f) * (1 + 1e-12));
  }
  const GridFunction f = random_function(g, 3);
  CHECK(max_abs(m.apply(f) - riesz_apply(RieszSpec{2}, f)) <= 1e-12);
  const GridFunction k = riesz_apply(RieszSpec{1, RieszSpec::Mode::kernel}, GridFunction(g, 1.0));
  CHECK(max_abs(k) <= 1e-10);
}

TEST_CASE("commutator matrix") {
  const TorusGrid g(2, 1);
  const GridFunction b = random_function(g, 5), f = random_function(g, 6);
  for (auto mode : {RieszSpec::Mode::multiplier, RieszSpec::Mode::kernel}) {
    const RieszSpec spec{1, mode};
    const DenseOperator c = commutator_matrix(b, spec);
    const GridFunction direct = pointwise_product(b, riesz_apply(spec, f)) - riesz_apply(spec, pointwise_product(b, f));
    CHECK(max_abs(c.apply(f) - direct) <= 1e-10);
    CHECK(commutator_matrix(GridFunction(g, 1.5), spec).matrix.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("weighted conjugation") {
  const TorusGrid g(2, 1);
  const WeightPair w = power_pair(g);
  const DenseOperator c = commutator_matrix(random_function(g, 9), RieszSpec{1});
  const DenseOperator t = weighted_conjugate(c, w.lambda, w.mu);
  CHECK(t.source_weight == "mu");
  CHECK(t.target_weight == "lambda");
  CHECK((weighted_conjugate_inverse(t, w.lambda, w.mu).matrix - c.matrix).cwiseAbs().maxCoeff() <= 1e-12);
  const GridFunction f = random_function(g, 10);
  GridFunction scaled = f;
  for (std::size_t i = 0; i < f.size(); ++i) scaled[i] /= std::sqrt(w.mu[i]);
  GridFunction want = c.apply(scaled);
  for (std::size_t i = 0; i < f.size(); ++i) want[i] *= std::sqrt(w.lambda[i]);
  CHECK(max_abs(t.apply(f) - want) <= 1e-11);
  CHECK_THROWS(weighted_conjugate(c, w.lambda, make_weight(TorusGrid(2, 2), WeightSpec::constant(1.0))));
}

TEST_CASE("materialize reproduces an operator") {
  const TorusGrid g(2, 1);
  const DenseOperator r = riesz_matrix(g, RieszSpec{2});
  const DenseOperator m = materialize(g, [](const GridFunction& f) { return riesz_apply(RieszSpec{2}, f); });
  CHECK((r.matrix - m.matrix).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("Haar shift on single Haar functions") {
  const TorusGrid g(2, 3);
  const DyadicSystem sys(g, Shift::from_index(2, 3));
  const auto specs = shift_specs();
  for (int k = 0; k < 3; ++k)
    for (const auto& q : sys.level_cubes(k))
      for (unsigned e = 0; e < 3; ++e)
        for (const auto& spec : specs) {
          const GridFunction out = haar_shift_apply(spec, haar_function(q, Signature{e, 2}, g), sys);
          const int te = spec.map_signature(e);
          if (k == 2 || te < 0) {
            CHECK(max_abs(out) <= 1e-12);
            continue;
          }
          const GridFunction want = haar_function(spec.select(q, sys), Signature{static_cast<unsigned>(te), 2}, g);
          CHECK(max_abs(out - want) <= 1e-12);
        }
  const DyadicCube& q = sys.cube(1, 2);
  const DyadicCube& smallest = specs[0].select(q, sys);
  for (const auto& c : sys.children(q)) CHECK(smallest.flat_m <= c.flat_m);
  CHECK(specs[1].select(q, sys) == sys.child_at(q, 0b10));
  ShiftSpec short_map;
  short_map.signature_map = {0};
  CHECK_THROWS_AS(short_map.map_signature(2), std::out_of_range);
}

TEST_CASE("paraproduct identities") {
  const TorusGrid g(2, 3);
  const DyadicSystem sys(g, Shift::from_index(2, 6));
  const GridFunction b = band_limited(sys, 31), f = band_limited(sys, 32), h = band_limited(sys, 33);

  CHECK(std::abs(inner(paraproduct_apply(Paraproduct::pi, b, f, sys), h) -
                 inner(f, paraproduct_apply(Paraproduct::pi_star, b, h, sys))) <= 1e-10);

  double mb = 0.0;
  for (std::size_t c = 0; c < b.size(); ++c) mb += b[c];
  mb /= static_cast<double>(b.size());
  GridFunction centered = b;
  for (std::size_t c = 0; c < b.size(); ++c) centered[c] -= mb;
  CHECK(max_abs(paraproduct_apply(Paraproduct::pi, b, GridFunction(g, 1.0), sys) - centered) <= 1e-12);

  // Product of two Haar expansions.
  double mf = 0.0;
  for (std::size_t c = 0; c < f.size(); ++c) mf += f[c];
  mf /= static_cast<double>(f.size());
  GridFunction sum = paraproduct_apply(Paraproduct::pi, b, f, sys) + paraproduct_apply(Paraproduct::pi, f, b, sys) +
                     paraproduct_apply(Paraproduct::pi_star, b, f, sys) +
                     paraproduct_apply(Paraproduct::gamma, b, f, sys);
  for (std::size_t c = 0; c < sum.size(); ++c) sum[c] += mb * mf;
  CHECK(max_abs(sum - pointwise_product(b, f)) <= 1e-10);

  const TorusGrid line(1, 4);
  const DyadicSystem sys1(line, Shift::from_index(1, 1));
  const GridFunction b1 = band_limited(sys1, 1), f1 = band_limited(sys1, 2);
  CHECK(max_abs(paraproduct_apply(Paraproduct::gamma, b1, f1, sys1)) == 0.0);
  CHECK_THROWS_AS(paraproduct_apply(Paraproduct::remainder, b, f, sys), std::invalid_argument);
}

TEST_CASE("commutator decomposition residual") {
  const TorusGrid g(2, 3);
  const auto specs = shift_specs();
  for (unsigned t = 0; t < 20; ++t) {
    const DyadicSystem sys(g, Shift::from_index(2, t % 9));
    const GridFunction b = band_limited(sys, 500 + t), f = band_limited(sys, 600 + t);
    for (const auto& spec : specs) CHECK(decomposition_residual(b, f, spec, sys) <= 1e-10);
  }
}

TEST_CASE("sign-cell frame") {
  const TorusGrid g(2, 3);
  const DyadicSystem sys(g, Shift::from_index(2, 0));
  const WeightPair w = power_pair(g);
  for (int dir : {1, 2}) {
    const SignCellFrame fr = sign_cell_frame(sys.cube(1, 1), dir, w, sys);
    CHECK(fr.pairs.size() == 48);
    CHECK(fr.g.size() == 48);
    CHECK(fr.all_sign_constant);
    CHECK(fr.size_constant > 0.0);
    CHECK(fr.span_rank == 15);
    for (std::size_t i = 0; i < fr.pairs.size(); ++i) {
      double integral = 0.0;
      for (double v : fr.g[i].values()) integral += v;
      CHECK(std::abs(integral) <= 1e-12);
      CHECK(l2_norm(fr.G[i]) <= 1.0 + 1e-12);
      CHECK(l2_norm(fr.H[i]) <= 1.0 + 1e-12);
      const auto& [p1, p2] = std::pair(fr.pairs[i].first, fr.pairs[i].second);
      CHECK(p1.volume() == fr.cube.volume() / 16);
      CHECK(p2.volume() == p1.volume());
    }
  }
  // On the coarsest cube the displacements wrap around the torus and lose their sign.
  CHECK_FALSE(sign_cell_frame(sys.cube(0, 0), 1, w, sys).all_sign_constant);
  CHECK_THROWS_AS(sign_cell_frame(sys.cube(2, 0), 1, w, sys), std::invalid_argument);
}

TEST_CASE("NWO families stay inside their cubes") {
  const TorusGrid g(2, 2);
  const WeightPair w = power_pair(g);
  const auto systems = all_systems(g);
  for (NwoKind kind : {NwoKind::sufficiency_g, NwoKind::sufficiency_h, NwoKind::necessity_g, NwoKind::necessity_h}) {
    const Family fam = nwo_family(kind, w, systems);
    const Weight& base = nwo_weight(kind, w);
    const bool haar = kind == NwoKind::sufficiency_g || kind == NwoKind::necessity_h;
    CHECK(fam.size() == systems.size() * (haar ? 3 * (1 + 4) : 1 + 4 + 16));
    for (const auto& m : fam) {
      const auto cells = DyadicSystem(g, Shift::from_index(2, m.cube.omega)).cells(m.cube);
      double l2 = 0.0;
      for (auto c : cells) l2 += m.f[c] * m.f[c];
      CHECK(l2 * g.cell_volume() == doctest::Approx(1.0).epsilon(1e-12));
      if (!haar) continue;
      // The Haar members are mean-free against the square root of the base weight.
      double weighted = 0.0;
      for (auto c : cells) weighted += m.f[c] / std::sqrt(base[c]);
      CHECK(std::abs(weighted) <= 1e-10);
    }
  }
}

TEST_CASE("Whitney kernel coefficients") {
  const TorusGrid g(2, 3);
  const DyadicSystem sys(g, Shift::from_index(2, 0));
  const WhitneyPair pair = make_whitney_pair(sys.cube(3, 0), sys.cube(3, 4 * 8 + 3));
  const WhitneyCoefficients wc = whitney_kernel_coefficients(pair, 1, 8);
  const int zero[] = {0, 0, 0, 0};
  const double scale = std::sqrt(pair.first.volume() * pair.second.volume());
  CHECK(std::abs(wc.at(zero) / scale - wc.zero_mode_average) <= 1e-12 * std::abs(wc.zero_mode_average));
  CHECK(wc.reconstruction_error <= 0.05);
  auto outer = wc.shell(8), inner_shell = wc.shell(1);
  CHECK(inner_shell.size() == 80);
  std::sort(inner_shell.begin(), inner_shell.end());
  const double median = inner_shell[inner_shell.size() / 2];
  MESSAGE("reconstruction error " << wc.reconstruction_error << ", shell-8 max "
                                  << *std::max_element(outer.begin(), outer.end()) << ", shell-1 median " << median);
  CHECK(*std::max_element(outer.begin(), outer.end()) <= 0.1 * median);
  const int outside[] = {9, 0, 0, 0};
  CHECK_THROWS_AS(wc.at(outside), std::out_of_range);
  CHECK_THROWS_AS(whitney_kernel_coefficients(pair, 1, 20), std::invalid_argument);
  CHECK_THROWS_AS(whitney_kernel_coefficients(pair, 1, 4, 3.0, 16),
                  std::invalid_argument);
}
