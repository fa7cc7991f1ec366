#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "wcomm/schatten.hpp"
#include "wcomm/seq_norms.hpp"

using namespace wcomm;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = normal(rng);
  return a;
}

std::vector<double> gram_singular_values(const Eigen::MatrixXd& a) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a.transpose() * a);
  std::vector<double> s;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) s.push_back(std::sqrt(std::max(0.0, eig.eigenvalues()[i])));
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

}  // namespace

TEST_CASE("closed-form spectra") {
  const Eigen::Vector3d d(3.0, -2.0, 1.0);
  const SingularSpectrum diag = singular_values(Eigen::MatrixXd(d.asDiagonal()));
  CHECK(diag.values == std::vector<double>{3.0, 2.0, 1.0});
  CHECK(diag.numerical_rank == 3);

  const Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(7, 1.0, 7.0), v = Eigen::VectorXd::LinSpaced(5, -1.0, 1.5);
  const SingularSpectrum rank1 = singular_values(Eigen::MatrixXd(u * v.transpose()));
  CHECK(rank1.values.size() == 5);
  CHECK(std::abs(rank1.values[0] - u.norm() * v.norm()) <= 1e-10);
  for (std::size_t k = 1; k < rank1.values.size(); ++k) CHECK(rank1.values[k] <= 1e-10);
  CHECK(rank1.numerical_rank == 1);
  CHECK(rank1.rows == 7);
  CHECK(rank1.cols == 5);

  CHECK(singular_values(Eigen::MatrixXd(0, 0)).values.empty());
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(2, 2);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(singular_values(bad), std::invalid_argument);
}

TEST_CASE("SVD agrees with the Gram eigen-solve") {
  for (unsigned t = 0; t < 3; ++t) {
    const Eigen::MatrixXd a = random_matrix(200, 200, 40 + t);
    const auto s = singular_values(a).values;
    const auto ref = gram_singular_values(a);
    for (std::size_t k = 0; k < s.size(); ++k) CHECK(std::abs(s[k] - ref[k]) <= 1e-8 * ref[0]);
  }
  const Eigen::MatrixXd tall = random_matrix(30, 12, 3);
  const auto s = singular_values(tall).values;
  const auto ref = gram_singular_values(tall);
  REQUIRE(s.size() == 12);
  for (std::size_t k = 0; k < s.size(); ++k) CHECK(std::abs(s[k] - ref[k]) <= 1e-10 * ref[0]);
}

TEST_CASE("Schatten-Lorentz norms") {
  const Eigen::MatrixXd a = random_matrix(40, 40, 9);
  const SingularSpectrum s = singular_values(a);
  CHECK(std::abs(schatten_lorentz_norm(s, 2, 2) - a.norm()) <= 1e-10 * a.norm());
  CHECK(schatten_lorentz_norm(singular_values(Eigen::MatrixXd(Eigen::Vector3d(3, 2, 1).asDiagonal())), 1, 1) ==
        doctest::Approx(6.0).epsilon(1e-14));
  CHECK(schatten_lorentz_norm(s, 1e6, kInfinity) == doctest::Approx(s.values[0]).epsilon(1e-4));

  for (int n : {1, 2, 3}) {
    Eigen::VectorXd d(50);
    for (Eigen::Index k = 0; k < d.size(); ++k) d[k] = std::pow(k + 1.0, -1.0 / n);
    CHECK(schatten_lorentz_norm(singular_values(Eigen::MatrixXd(d.asDiagonal())), n, kInfinity) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }

  // Weak norms never exceed strong ones, and both are monotone in p.
  for (double p : {1.0, 2.0, 3.0, 4.0}) {
    CHECK(schatten_lorentz_norm(s, p, kInfinity) <= schatten_lorentz_norm(s, p, p) * (1 + 1e-14));
    CHECK(schatten_lorentz_norm(s, p + 1, p + 1) <= schatten_lorentz_norm(s, p, p) * (1 + 1e-14));
  }

  // Exact zeros are skipped by the weak norm only.
  Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(4, 4);
  padded(0, 0) = 2.0;
  padded(1, 1) = 1.0;
  const SingularSpectrum ps = singular_values(padded);
  CHECK(ps.numerical_rank == 2);
  CHECK(schatten_lorentz_norm(ps, 2, kInfinity) == doctest::Approx(2.0));
  CHECK(schatten_lorentz_norm(ps, 2, 2) == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("spectral invariances") {
  const Eigen::MatrixXd a = random_matrix(25, 25, 12);
  const auto base = singular_values(a).values;
  const auto adj = singular_values(Eigen::MatrixXd(a.transpose())).values;
  std::vector<int> order(25);
  for (int i = 0; i < 25; ++i) order[i] = (7 * i + 3) % 25;
  Eigen::MatrixXd permuted(25, 25);
  for (int i = 0; i < 25; ++i)
    for (int j = 0; j < 25; ++j) permuted(i, j) = a(order[i], order[(j + 5) % 25]);
  const auto perm = singular_values(permuted).values;
  const auto scaled = singular_values(Eigen::MatrixXd(-3.0 * a)).values;
  for (std::size_t k = 0; k < base.size(); ++k) {
    CHECK(std::abs(adj[k] - base[k]) <= 1e-12 * base[0]);
    CHECK(std::abs(perm[k] - base[k]) <= 1e-12 * base[0]);
    CHECK(std::abs(scaled[k] - 3.0 * base[k]) <= 1e-12 * base[0]);
  }
  for (std::size_t k = 1; k < base.size(); ++k) CHECK(base[k] <= base[k - 1]);
}

TEST_CASE("NWO ratios of unweighted families") {
  const TorusGrid g(2, 2);
  const Weight one = make_weight(g, WeightSpec::constant(1.0));
  const WeightPair w = WeightPair::from(one, one);
  const auto systems = all_systems(g);
  for (NwoKind kind : {NwoKind::sufficiency_g, NwoKind::sufficiency_h, NwoKind::necessity_g, NwoKind::necessity_h})
    for (double r : {1.0, 2.0, 3.5}) CHECK(nwo_ratio(nwo_family(kind, w, systems), r).ratio == doctest::Approx(1.0));

  const WeightPair pw = WeightPair::from(make_weight(g, WeightSpec::power(0.5, {0.0, 0.0})),
                                         make_weight(g, WeightSpec::power(-0.5, {0.0, 0.0})));
  const Family fam = nwo_family(NwoKind::sufficiency_h, pw, systems);
  // r = 2 is the L2 normalisation of every member.
  CHECK(nwo_ratio(fam, 2.0).ratio == doctest::Approx(1.0).epsilon(1e-12));
  const NwoResult big = nwo_ratio(fam, 3.0);
  CHECK(big.ratio >= 1.0);
  CHECK(std::isfinite(big.ratio));

  const DyadicSystem sys(g, Shift::from_index(2, 0));
  Family leaking{{sys.cube(2, 0), GridFunction(g, 1.0)}};
  CHECK_THROWS_AS(nwo_ratio(leaking, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(nwo_ratio(fam, 0.0), std::invalid_argument);
}

TEST_CASE("pairing sums") {
  const TorusGrid g(2, 1);
  const DyadicSystem sys(g, Shift::from_index(2, 0));
  std::vector<GridFunction> e, f;
  for (const auto& q : sys.level_cubes(1)) {
    GridFunction u = indicator(q, g);
    u *= 1.0 / std::sqrt(q.volume());
    e.push_back(u);
  }
  // T = sum s_i <., e_i> f_i with f_i = e_{i+1}, so the pairings reproduce s_i.
  const std::vector<double> s{4.0, 3.0, 2.0, 1.0};
  DenseOperator t;
  t.matrix = Eigen::MatrixXd::Zero(g.cell_count(), g.cell_count());
  for (std::size_t i = 0; i < e.size(); ++i) {
    f.push_back(e[(i + 1) % e.size()]);
    Eigen::Map<const Eigen::VectorXd> ei(e[i].values().data(), e[i].size());
    Eigen::Map<const Eigen::VectorXd> fi(f[i].values().data(), f[i].size());
    t.matrix += s[i] * g.cell_volume() * fi * ei.transpose();
  }
  CHECK(rs_pairing_sum(t, e, f, 1, 1) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(rs_pairing_sum(t, e, f, 2, 2) == doctest::Approx(std::sqrt(30.0)).epsilon(1e-12));
  CHECK(rs_pairing_sum(t, e, f, 2, 2) <= schatten_lorentz_norm(singular_values(t), 2, 2) * (1 + 1e-12));

  DenseOperator zero;
  zero.matrix = Eigen::MatrixXd::Zero(g.cell_count(), g.cell_count());
  CHECK(rs_pairing_sum(zero, e, f, 1, 1) == 0.0);
  CHECK_THROWS_AS(rs_pairing_sum(t, e, std::span<const GridFunction>(f.data(), 2), 1, 1), std::invalid_argument);
}

TEST_CASE("weighted NWO ratios obey the reverse Holder bound") {
  // With r = 2(1 + sigma), Holder on each cube gives ratio <= sqrt(C_rh) for every member.
  const TorusGrid g(2, 4);
  const auto systems = all_systems(g);
  const WeightPair w = WeightPair::from(make_weight(g, WeightSpec::power(1.0, {0.0, 0.0})),
                                        make_weight(g, WeightSpec::power(0.5, {0.5, 0.5})));
  const std::vector<double> candidates{0.125, 0.25, 0.5, 1.0};
  for (NwoKind kind : {NwoKind::sufficiency_g, NwoKind::sufficiency_h, NwoKind::necessity_g, NwoKind::necessity_h}) {
    const ReverseHolder rh = reverse_holder_exponent(nwo_weight(kind, w), candidates);
    const double r = 2.0 * (1.0 + rh.sigma);
    const NwoResult res = nwo_ratio(nwo_family(kind, w, systems), r);
    CHECK(std::isfinite(res.ratio));
    CHECK(res.ratio >= 1.0 - 1e-12);
    CHECK(res.ratio <= std::sqrt(rh.constant) * (1 + 1e-12));
  }
}
