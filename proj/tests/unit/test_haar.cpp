#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "wcomm/haar.hpp"

using namespace wcomm;

namespace {

GridFunction random_function(const TorusGrid& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal;
  GridFunction f(g);
  for (std::size_t c = 0; c < f.size(); ++c) f[c] = normal(rng);
  return f;
}

double max_abs_diff(const GridFunction& a, const GridFunction& b) {
  double m = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) m = std::max(m, std::abs(a[c] - b[c]));
  return m;
}

double direct_average(const GridFunction& b, const DyadicSystem& sys, const DyadicCube& q) {
  double s = 0.0;
  const auto cells = sys.cells(q);
  for (auto c : cells) s += b[c];
  return s / static_cast<double>(cells.size());
}

}  // namespace

TEST_CASE("signatures") {
  CHECK(Signature::cancellative_count(2) == 3);
  CHECK(Signature::cancellative_count(3) == 7);
  CHECK(Signature{0b11, 2}.cancellative() == false);
  CHECK(Signature{0b10, 2}.component(0) == 1);
  CHECK(Signature{0b10, 2}.component(1) == 0);
  // A zero component is negative on the upper half of that axis.
  CHECK(Signature{0b00, 2}.sign_on_child(0b00) == 1);
  CHECK(Signature{0b00, 2}.sign_on_child(0b10) == -1);
  CHECK(Signature{0b00, 2}.sign_on_child(0b11) == 1);
  CHECK(Signature{0b01, 2}.sign_on_child(0b01) == 1);
}

TEST_CASE("Haar function norms") {
  const TorusGrid g(2, 3);
  for (const auto& sys : all_systems(g)) {
    const DyadicCube& q = sys.cube(2, 7);
    CHECK(q.volume() == 1.0 / 16);
    for (unsigned e = 0; e < 3; ++e) {
      const GridFunction h = haar_function(q, Signature{e, 2}, g);
      CHECK(std::abs(l2_norm(h) - 1.0) <= 1e-13);
      double integral = 0.0, l1 = 0.0, linf = 0.0;
      for (std::size_t c = 0; c < h.size(); ++c) {
        integral += h[c] * g.cell_volume();
        l1 += std::abs(h[c]) * g.cell_volume();
        linf = std::max(linf, std::abs(h[c]));
      }
      CHECK(std::abs(integral) <= 1e-14);
      CHECK(std::abs(l1 * linf - 1.0) <= 1e-12);
      for (double r : {1.0, 3.0, 4.0}) CHECK(lp_norm(h, r) == doctest::Approx(std::pow(q.volume(), 1 / r - 0.5)));
    }
    const GridFunction one = haar_function(q, Signature{3, 2}, g);
    CHECK(std::abs(l2_norm(one) - 1.0) <= 1e-13);
  }
}

TEST_CASE("orthonormality within one system") {
  const TorusGrid g(2, 2);
  const DyadicSystem sys(g, Shift::from_index(2, 5));
  std::vector<GridFunction> basis;
  for (int k = 0; k < 2; ++k)
    for (const auto& q : sys.level_cubes(k))
      for (unsigned e = 0; e < 3; ++e) basis.push_back(haar_function(q, Signature{e, 2}, g));
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = i; j < basis.size(); ++j)
      CHECK(std::abs(inner(basis[i], basis[j]) - (i == j ? 1.0 : 0.0)) <= 1e-12);
}

TEST_CASE("analysis of simple inputs") {
  const TorusGrid g(2, 3);
  const DyadicSystem sys(g, Shift::from_index(2, 2));
  const HaarCoefficients flat = analyze(GridFunction(g, 2.5), sys);
  CHECK(flat.coarse() == doctest::Approx(2.5));
  for (double c : flat.all()) CHECK(std::abs(c) <= 1e-13);

  const DyadicCube& p = sys.cube(1, 2);
  const HaarCoefficients single = analyze(haar_function(p, Signature{1, 2}, g), sys);
  for (int k = 0; k < 3; ++k)
    for (const auto& q : sys.level_cubes(k))
      for (unsigned e = 0; e < 3; ++e)
        CHECK(std::abs(single.coeff(q, e) - ((q == p && e == 1) ? 1.0 : 0.0)) <= 1e-12);
  CHECK(std::abs(single.coarse()) <= 1e-14);

  HaarCoefficients zero = HaarCoefficients::zero(sys);
  zero.coarse() = -1.25;
  const GridFunction c = synthesize(zero, sys);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == -1.25);
  CHECK_THROWS(analyze(GridFunction(TorusGrid(2, 2)), sys));
  GridFunction bad(g);
  bad[4] = std::nan("");
  CHECK_THROWS_AS(analyze(bad, sys), std::invalid_argument);
}

TEST_CASE("roundtrip and Parseval") {
  const TorusGrid g(2, 3);
  const auto systems = all_systems(g);
  for (unsigned t = 0; t < 50; ++t) {
    const GridFunction b = random_function(g, 100 + t);
    const double energy = inner(b, b);
    for (const auto& sys : systems) {
      const HaarCoefficients c = analyze(b, sys);
      CHECK(max_abs_diff(synthesize(c, sys), b) <= 1e-12);
      // Quadratic-form oracle for Parseval: sum of squares over cells times h^n.
      double direct = 0.0;
      for (std::size_t i = 0; i < b.size(); ++i) direct += b[i] * b[i];
      direct *= g.cell_volume();
      CHECK(std::abs(c.squared_norm() - direct) <= 1e-10 * direct);
      CHECK(std::abs(energy - direct) <= 1e-12 * direct);
    }
  }
}

TEST_CASE("conditional expectations") {
  const TorusGrid g(2, 3);
  const DyadicSystem sys(g, Shift::from_index(2, 4));
  const GridFunction b = random_function(g, 9);
  const GridFunction e0 = expectation(b, sys, 0);
  double mean = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) mean += b[i];
  mean /= static_cast<double>(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(e0[i] == doctest::Approx(mean).epsilon(1e-12));

  const GridFunction top = expectation(b, sys, 3);
  for (const auto& q : sys.level_cubes(3)) {
    const double avg = direct_average(b, sys, q);
    for (auto c : sys.cells(q)) CHECK(std::abs(top[c] - avg) <= 1e-12);
  }
  for (int k = 0; k <= 3; ++k)
    for (int j = 0; j <= 3; ++j) {
      const GridFunction composed = expectation(expectation(b, sys, j), sys, k);
      CHECK(max_abs_diff(composed, expectation(b, sys, std::min(k, j))) <= 1e-12);
    }
  CHECK_THROWS(expectation(b, sys, 4));
  CHECK_THROWS(expectation(b, sys, -1));
}

TEST_CASE("martingale differences") {
  const TorusGrid g(2, 3);
  const DyadicSystem sys(g, Shift::from_index(2, 1));
  const GridFunction b = random_function(g, 21);
  const GridFunction flat(g, 3.0);
  for (int k = 0; k < 3; ++k) {
    GridFunction sum(g);
    for (const auto& q : sys.level_cubes(k)) {
      const GridFunction d = martingale_difference(b, q, sys);
      double integral = 0.0;
      for (auto c : sys.cells(q)) integral += d[c] * g.cell_volume();
      CHECK(std::abs(integral) <= 1e-13);
      const GridFunction indicator_q = indicator(q, g);
      for (std::size_t c = 0; c < d.size(); ++c)
        if (indicator_q[c] == 0.0) CHECK(d[c] == 0.0);
      sum += d;
      const GridFunction z = martingale_difference(flat, q, sys);
      for (std::size_t c = 0; c < z.size(); ++c) CHECK(std::abs(z[c]) <= 1e-13);
    }
    CHECK(max_abs_diff(sum, expectation(b, sys, k + 1) - expectation(b, sys, k)) <= 1e-12);
  }
  CHECK_THROWS(martingale_difference(b, sys.cube(3, 0), sys));
}

TEST_CASE("local expansion and average telescoping") {
  const TorusGrid g(2, 3);
  const DyadicSystem sys(g, Shift::from_index(2, 8));
  const GridFunction b = random_function(g, 33);
  const HaarCoefficients c = analyze(b, sys);
  for (int k = 0; k <= 3; ++k)
    for (const auto& q : sys.level_cubes(k))
      CHECK(std::abs(average_from_ancestors(c, q, sys) - direct_average(b, sys, q)) <= 1e-11);

  // (b - <b>_Q) 1_Q equals the martingale differences of all R inside Q plus the cell-scale remainder.
  const DyadicCube& q = sys.cube(1, 1);
  const double avg = direct_average(b, sys, q);
  GridFunction rebuilt(g);
  for (int k = 1; k < 3; ++k)
    for (const auto& r : sys.level_cubes(k)) {
      if (!q.contains_cell(r.anchor) || !q.contains_box(r.box())) continue;
      rebuilt += martingale_difference(b, r, sys);
    }
  const GridFunction residual = b - expectation(b, sys, 3);
  const GridFunction ind = indicator(q, g);
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (ind[i] == 0.0) continue;
    CHECK(std::abs((b[i] - avg) - (rebuilt[i] + residual[i])) <= 1e-11);
  }
}

TEST_CASE("level expansion") {
  const TorusGrid g(2, 2);
  const DyadicSystem sys(g, Shift::from_index(2, 0));
  std::vector<double> values(sys.count_at(2));
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<double>(i);
  const GridFunction f = expand_level(values, 2, sys);
  CHECK_THROWS(expand_level(values, 1, sys));
  for (const auto& q : sys.level_cubes(2))
    for (auto c : sys.cells(q)) CHECK(f[c] == static_cast<double>(q.flat_m));
}
