#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "wcomm/weights.hpp"

using namespace wcomm;

namespace {

const std::vector<double> kOrigin{0.0, 0.0};

double direct_mass(const std::vector<double>& values, const TorusGrid& g, const WrappedBox& b) {
  double s = 0.0;
  for (int i = 0; i < b.len[0]; ++i)
    for (int j = 0; j < b.len[1]; ++j) s += values[g.flatten(g.wrap({b.lo[0] + i, b.lo[1] + j, 0, 0}))];
  return s * g.cell_volume();
}

double direct_cube_mass(const Weight& w, const DyadicSystem& sys, const DyadicCube& q, double exponent) {
  double s = 0.0;
  for (auto c : sys.cells(q)) s += std::pow(w[c], exponent);
  return s * w.grid().cell_volume();
}

std::vector<double> random_positive(std::size_t count, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  std::vector<double> v(count);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_CASE("weight construction") {
  const TorusGrid g(2, 3);
  const Weight one = make_weight(g, WeightSpec::constant(1.0));
  for (double v : one.values()) CHECK(v == 1.0);
  CHECK(one.total() == doctest::Approx(1.0).epsilon(1e-15));

  const Weight flat = make_weight(g, WeightSpec::power(0.0, {0.25, 0.5}));
  for (double v : flat.values()) CHECK(v == 1.0);

  const Weight p = make_weight(g, WeightSpec::power(1.0, kOrigin));
  double direct = 0.0;
  for (int i = 0; i < g.side(); ++i)
    for (int j = 0; j < g.side(); ++j) {
      double x = (i + 0.5) * g.h(), y = (j + 0.5) * g.h();
      x = std::min(x, 1 - x);
      y = std::min(y, 1 - y);
      direct += std::hypot(x, y);
    }
  direct *= g.cell_volume();
  CHECK(std::abs(p.total() - direct) <= 1e-12 * direct);

  CHECK_THROWS_AS(make_weight(g, WeightSpec::power(2.0, kOrigin)), std::invalid_argument);
  CHECK_THROWS_AS(make_weight(g, WeightSpec::power(-2.5, kOrigin)), std::invalid_argument);
  CHECK_THROWS_AS(make_weight(g, WeightSpec::power(1.0, {0.01, 0.0})), std::invalid_argument);
  CHECK_THROWS_AS(make_weight(g, WeightSpec::constant(0.0)), std::invalid_argument);
  std::vector<double> bad(g.cell_count(), 1.0);
  bad[3] = -1.0;
  CHECK_THROWS_AS(Weight(g, bad), std::invalid_argument);
}

TEST_CASE("box masses") {
  const TorusGrid g(2, 3);
  const DyadicSystem sys(g, Shift::from_index(2, 0));
  const Weight one = make_weight(g, WeightSpec::constant(1.0));
  CHECK(one.mass(sys.cube(2, 5)) == doctest::Approx(1.0 / 16).epsilon(1e-15));
  CHECK(one.mass(Region(g)) == 0.0);

  const auto values = random_positive(g.cell_count(), 3);
  const Weight w(g, values);
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> pos(0, g.side() - 1), len(0, g.side());
  for (int t = 0; t < 200; ++t) {
    const WrappedBox b{{pos(rng), pos(rng), 0, 0}, {len(rng), len(rng), 0, 0}};
    const double want = direct_mass(values, g, b);
    CHECK(std::abs(w.mass_box(b) - want) <= 1e-13 * std::max(want, 1e-300));
    CHECK(std::abs(w.mass(Region(g, {b})) - want) <= 1e-13 * std::max(want, 1e-300));
  }
  CHECK(w.total() == doctest::Approx(direct_mass(values, g, {{0, 0, 0, 0}, {24, 24, 0, 0}})).epsilon(1e-13));

  const DyadicSystem shifted(g, Shift::from_index(2, 8));
  for (const auto& q : shifted.all())
    CHECK(w.mass(q) == doctest::Approx(direct_cube_mass(w, shifted, q, 1.0)).epsilon(1e-13));
}

TEST_CASE("derived weight nu") {
  const TorusGrid g(2, 3);
  const Weight a(g, random_positive(g.cell_count(), 5));
  const Weight self = nu_from(a, a);
  for (double v : self.values()) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
  const Weight four = make_weight(g, WeightSpec::constant(4.0));
  const Weight one = make_weight(g, WeightSpec::constant(1.0));
  const Weight two = nu_from(four, one);
  for (double v : two.values()) CHECK(v == 2.0);

  const Weight mu = make_weight(g, WeightSpec::power(0.5, kOrigin));
  const Weight lambda = make_weight(g, WeightSpec::power(-0.5, kOrigin));
  const Weight nu = nu_from(mu, lambda);
  const Weight half = make_weight(g, WeightSpec::power(0.5, kOrigin));
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    CHECK(std::abs(nu[c] - half[c]) <= 1e-14 * half[c]);
    CHECK(std::abs(nu[c] * nu[c] * lambda[c] - mu[c]) <= 1e-12 * mu[c]);
  }
  CHECK_THROWS(nu_from(four, make_weight(TorusGrid(2, 2), WeightSpec::constant(1.0))));
}

TEST_CASE("A2 constants") {
  const TorusGrid g(2, 2);
  for (double c : {0.3, 1.0, 7.0}) {
    const Weight w = make_weight(g, WeightSpec::constant(c));
    CHECK(a2_constant(w) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(a2_constant(w, A2Scope::all_boxes) == doctest::Approx(1.0).epsilon(1e-14));
  }

  // Checkerboard of 2x2 blocks with values 1 and 9, compared against exhaustive box enumeration.
  std::vector<double> board(g.cell_count());
  for (int i = 0; i < g.side(); ++i)
    for (int j = 0; j < g.side(); ++j) board[g.flatten({i, j, 0, 0})] = ((i / 2 + j / 2) % 2) ? 9.0 : 1.0;
  const Weight w(g, board);
  std::vector<double> inv(board.size());
  for (std::size_t c = 0; c < board.size(); ++c) inv[c] = 1.0 / board[c];
  double brute = 1.0;
  for (int s = 1; s <= g.side(); ++s)
    for (int a = 0; a < g.side(); ++a)
      for (int b = 0; b < g.side(); ++b) {
        const WrappedBox box{{a, b, 0, 0}, {s, s, 0, 0}};
        const double vol = std::pow(static_cast<double>(s) / g.side(), 2);
        brute = std::max(brute, direct_mass(board, g, box) * direct_mass(inv, g, box) / (vol * vol));
      }
  CHECK(a2_constant(w, A2Scope::all_boxes) == doctest::Approx(brute).epsilon(1e-12));
  CHECK(a2_constant(w) >= 1.0);
  CHECK(a2_constant(w) <= a2_constant(w, A2Scope::all_boxes) + 1e-12);
}

TEST_CASE("cube-wise A2 sandwich and power rule") {
  const TorusGrid g(2, 3);
  const Weight w = make_weight(g, WeightSpec::power(1.0, kOrigin));
  const Weight inv = w.inverse();
  const double a2 = a2_constant(w);
  for (const auto& sys : all_systems(g))
    for (const auto& q : sys.all()) {
      const double v2 = q.volume() * q.volume();
      const double prod = w.mass(q) * inv.mass(q);
      CHECK(prod >= v2 * (1 - 1e-12));
      CHECK(prod <= a2 * v2 * (1 + 1e-12));
    }
  for (double alpha : {0.5, 1.0, 1.5})
    for (double delta : {0.25, 0.5, 0.75}) {
      const Weight p = make_weight(g, WeightSpec::power(alpha, kOrigin));
      CHECK(a2_constant(p.pow(delta)) <= std::pow(a2_constant(p), delta) * (1 + 1e-9));
    }
}

TEST_CASE("reverse Holder exponents") {
  const TorusGrid g(2, 3);
  const std::vector<double> candidates{0.125, 0.25, 0.5, 1.0};
  const ReverseHolder flat = reverse_holder_exponent(make_weight(g, WeightSpec::constant(1.0)), candidates);
  CHECK(flat.sigma == 1.0);
  for (double c : flat.constants) CHECK(c == doctest::Approx(1.0).epsilon(1e-14));

  const Weight w = make_weight(g, WeightSpec::power(1.0, kOrigin));
  const auto systems = all_systems(g);
  double brute = 1.0;
  for (const auto& sys : systems)
    for (const auto& q : sys.all()) {
      const double hi = std::pow(direct_cube_mass(w, sys, q, 1.5) / q.volume(), 1.0 / 1.5);
      brute = std::max(brute, hi / (direct_cube_mass(w, sys, q, 1.0) / q.volume()));
    }
  CHECK(reverse_holder_constant(w, 0.5, systems) == doctest::Approx(brute).epsilon(1e-12));

  const ReverseHolder rh = reverse_holder_exponent(w, candidates);
  CHECK(rh.constant >= 1.0);
  CHECK(rh.constants.size() == candidates.size());
  for (std::size_t i = 1; i < rh.constants.size(); ++i) CHECK(rh.constants[i] >= rh.constants[i - 1] - 1e-12);
  const ReverseHolder strict = reverse_holder_exponent(w, candidates, 1.0);
  CHECK(strict.sigma == candidates.front());
  CHECK_THROWS(reverse_holder_exponent(w, std::vector<double>{}));
  CHECK_THROWS(reverse_holder_exponent(w, std::vector<double>{0.5, 0.25}));
}

TEST_CASE("doubling ratios") {
  const TorusGrid g(2, 3);
  const DyadicSystem sys(g, Shift::from_index(2, 0));
  const Weight one = make_weight(g, WeightSpec::constant(1.0));
  CHECK(doubling_ratio(one, sys.cube(2, 5), 2.0) == doctest::Approx(4.0));
  const Weight w = make_weight(g, WeightSpec::power(1.0, kOrigin));
  const double a2 = a2_constant(w);
  for (const auto& s : all_systems(g))
    for (const auto& q : s.all()) {
      CHECK(doubling_ratio(w, q, 1.0) == doctest::Approx(1.0));
      CHECK(doubling_ratio(w, q, 2.0) <= a2 * 16.0);
    }
}
