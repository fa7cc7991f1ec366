#include "wcomm/weights.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wcomm {

WeightSpec WeightSpec::constant(double c) {
  WeightSpec s;
  s.kind = Kind::constant;
  s.value = c;
  return s;
}

WeightSpec WeightSpec::power(double alpha, std::vector<double> center) {
  WeightSpec s;
  s.kind = Kind::power;
  s.alpha = alpha;
  s.center = std::move(center);
  return s;
}

WeightSpec WeightSpec::sampled(std::vector<double> values) {
  WeightSpec s;
  s.kind = Kind::samples;
  s.samples = std::move(values);
  return s;
}

Weight::Weight(const TorusGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid.cell_count())
    throw std::invalid_argument("weight sample count does not match the grid");
  for (double v : values_)
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("weights must be strictly positive and finite");

  const int n = grid.dim();
  const int N = grid.side();
  const std::size_t stride = static_cast<std::size_t>(N) + 1;
  std::size_t size = 1;
  for (int i = 0; i < n; ++i) size *= stride;
  prefix_.assign(size, 0.0L);

  auto pflat = [&](const IVec& idx) {
    std::size_t f = 0;
    for (int i = 0; i < n; ++i) f = f * stride + static_cast<std::size_t>(idx[i]);
    return f;
  };
  const long double vol = grid.cell_volume();
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    IVec idx = grid.unflatten(c);
    for (int i = 0; i < n; ++i) ++idx[i];
    prefix_[pflat(idx)] = values_[c] * vol;
  }
  // Running sums along each axis in turn.
  for (int axis = 0; axis < n; ++axis) {
    std::size_t step = 1;
    for (int i = n - 1; i > axis; --i) step *= stride;
    for (std::size_t f = 0; f < size; ++f) {
      const std::size_t coord = (f / step) % stride;
      if (coord > 0) prefix_[f] += prefix_[f - step];
    }
  }
}

long double Weight::prefix_query(const WrappedBox& b) const {
  const int n = grid_.dim();
  const std::size_t stride = static_cast<std::size_t>(grid_.side()) + 1;
  long double total = 0.0L;
  for (unsigned corner = 0; corner < (1u << n); ++corner) {
    std::size_t f = 0;
    int lows = 0;
    for (int i = 0; i < n; ++i) {
      const bool high = corner & (1u << i);
      const int coord = high ? b.lo[i] + b.len[i] : b.lo[i];
      if (!high) ++lows;
      f = f * stride + static_cast<std::size_t>(coord);
    }
    total += (lows % 2 == 0) ? prefix_[f] : -prefix_[f];
  }
  return total;
}

double Weight::mass(const Region& r) const {
  if (!(r.grid() == grid_)) throw std::invalid_argument("grid mismatch");
  long double total = 0.0L;
  for (const auto& b : r.unwrapped()) total += prefix_query(b);
  return static_cast<double>(total);
}

double Weight::mass_box(const WrappedBox& b) const { return mass(Region(grid_, {b})); }

double Weight::mass(const DyadicCube& q) const { return mass_box(q.box()); }

double Weight::total() const {
  WrappedBox all;
  for (int i = 0; i < grid_.dim(); ++i) all.len[i] = grid_.side();
  return mass_box(all);
}

Weight Weight::pow(double exponent) const {
  std::vector<double> v(values_.size());
  std::transform(values_.begin(), values_.end(), v.begin(),
                 [&](double x) { return std::pow(x, exponent); });
  return Weight(grid_, std::move(v));
}

std::vector<double> torus_distances(const TorusGrid& grid, std::span<const double> point) {
  if (static_cast<int>(point.size()) != grid.dim())
    throw std::invalid_argument("point dimension does not match the grid");
  std::vector<double> d(grid.cell_count());
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const IVec idx = grid.unflatten(c);
    double s = 0.0;
    for (int i = 0; i < grid.dim(); ++i) {
      double t = std::abs((idx[i] + 0.5) * grid.h() - point[i]);
      t -= std::floor(t);
      t = std::min(t, 1.0 - t);
      s += t * t;
    }
    d[c] = std::sqrt(s);
  }
  return d;
}

Weight make_weight(const TorusGrid& grid, const WeightSpec& spec) {
  switch (spec.kind) {
    case WeightSpec::Kind::constant:
      if (!(spec.value > 0.0)) throw std::invalid_argument("constant weight must be positive");
      return Weight(grid, std::vector<double>(grid.cell_count(), spec.value));
    case WeightSpec::Kind::samples:
      return Weight(grid, spec.samples);
    case WeightSpec::Kind::power: {
      const double n = grid.dim();
      if (!(spec.alpha > -n && spec.alpha < n))
        throw std::invalid_argument("power exponent must lie in (-n, n)");
      if (static_cast<int>(spec.center.size()) != grid.dim())
        throw std::invalid_argument("power weight center has the wrong dimension");
      for (double x : spec.center) {
        const double cells = x * grid.side();
        if (std::abs(cells - std::round(cells)) > 1e-9)
          throw std::invalid_argument("power weight center must be a lattice point");
      }
      auto d = torus_distances(grid, spec.center);
      for (double& v : d) v = std::pow(v, spec.alpha);
      return Weight(grid, std::move(d));
    }
  }
  throw std::invalid_argument("unknown weight kind");
}

Weight nu_from(const Weight& mu, const Weight& lambda) {
  if (!(mu.grid() == lambda.grid())) throw std::invalid_argument("grid mismatch");
  std::vector<double> v(mu.values().size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sqrt(mu[i] / lambda[i]);
  return Weight(mu.grid(), std::move(v));
}

WeightPair WeightPair::from(const Weight& mu, const Weight& lambda) {
  Weight nu = nu_from(mu, lambda);
  Weight nu_inv = nu.inverse();
  return WeightPair{mu, lambda, std::move(nu), mu.inverse(), lambda.inverse(), std::move(nu_inv)};
}

double a2_constant(const Weight& w, std::span<const DyadicSystem> systems) {
  const Weight inv = w.inverse();
  double best = 1.0;
  for (const auto& sys : systems)
    for (const auto& q : sys.all()) {
      const double v = q.volume();
      best = std::max(best, (w.mass(q) / v) * (inv.mass(q) / v));
    }
  return best;
}

double a2_constant(const Weight& w, A2Scope scope) {
  const TorusGrid& grid = w.grid();
  if (scope == A2Scope::dyadic_all_shifts) {
    const auto systems = all_systems(grid);
    return a2_constant(w, systems);
  }
  const Weight inv = w.inverse();
  const int N = grid.side();
  const int n = grid.dim();
  double best = 1.0;
  for (int s = 1; s <= N; ++s) {
    const double vol = std::pow(static_cast<double>(s) / N, n);
    const std::size_t anchors = (s == N) ? 1 : grid.cell_count();
    for (std::size_t a = 0; a < anchors; ++a) {
      WrappedBox b;
      b.lo = grid.unflatten(a);
      for (int i = 0; i < n; ++i) b.len[i] = s;
      best = std::max(best, (w.mass_box(b) / vol) * (inv.mass_box(b) / vol));
    }
  }
  return best;
}

double reverse_holder_constant(const Weight& w, double sigma,
                               std::span<const DyadicSystem> systems) {
  const Weight lifted = w.pow(1.0 + sigma);
  double best = 1.0;
  for (const auto& sys : systems)
    for (const auto& q : sys.all()) {
      const double v = q.volume();
      const double high = std::pow(lifted.mass(q) / v, 1.0 / (1.0 + sigma));
      best = std::max(best, high / (w.mass(q) / v));
    }
  return best;
}

ReverseHolder reverse_holder_exponent(const Weight& w, std::span<const double> candidates,
                                      double max_constant) {
  if (candidates.empty()) throw std::invalid_argument("reverse Holder candidate list is empty");
  if (!std::is_sorted(candidates.begin(), candidates.end()) || candidates.front() <= 0.0)
    throw std::invalid_argument("candidates must be positive and ascending");
  const auto systems = all_systems(w.grid());
  ReverseHolder out;
  out.sigma = candidates.front();
  for (double s : candidates) out.constants.push_back(reverse_holder_constant(w, s, systems));
  out.constant = out.constants.front();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (out.constants[i] <= max_constant) {
      out.sigma = candidates[i];
      out.constant = out.constants[i];
    }
  }
  return out;
}

double doubling_ratio(const Weight& w, const DyadicCube& q, double c) {
  return w.mass(enlarge(q, c, w.grid())) / w.mass(q);
}

}  // namespace wcomm
