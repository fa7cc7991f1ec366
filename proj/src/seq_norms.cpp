#include "wcomm/seq_norms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace wcomm {

namespace {

int mod(int a, int m) {
  int r = a % m;
  return r < 0 ? r + m : r;
}

bool meets(const DyadicCube& p, const WrappedBox& b) {
  for (int i = 0; i < p.n; ++i) {
    if (b.len[i] >= p.grid_side) continue;
    const bool hit = mod(b.lo[i] - p.anchor[i], p.grid_side) < p.side ||
                     mod(p.anchor[i] - b.lo[i], p.grid_side) < b.len[i];
    if (!hit) return false;
  }
  return true;
}

bool inside(const DyadicCube& p, const WrappedBox& b) {
  for (int i = 0; i < p.n; ++i) {
    if (b.len[i] >= p.grid_side) continue;
    if (mod(p.anchor[i] - b.lo[i], p.grid_side) + p.side > b.len[i]) return false;
  }
  return true;
}

void require_system_sequence(const IndexedSequence& s, const DyadicSystem& system) {
  if (s.size() != system.count()) throw std::invalid_argument("sequence is missing cube keys");
  for (std::size_t i = 0; i < s.size(); ++i)
    if (!(s.keys[i] == system.at_ordinal(i).key()))
      throw std::invalid_argument("sequence keys do not match the dyadic system");
}

}  // namespace

IndexedSequence::IndexedSequence(std::vector<CubeKey> k, std::vector<double> v)
    : keys(std::move(k)), values(std::move(v)) {
  if (keys.size() != values.size()) throw std::invalid_argument("key/value length mismatch");
  for (double x : values)
    if (!(x >= 0.0)) throw std::invalid_argument("sequence values must be nonnegative");
  std::vector<CubeKey> sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("duplicate cube key");
}

IndexedSequence IndexedSequence::over(const DyadicSystem& system, std::vector<double> values) {
  std::vector<CubeKey> keys;
  keys.reserve(system.count());
  for (const auto& q : system.all()) keys.push_back(q.key());
  return IndexedSequence(std::move(keys), std::move(values));
}

IndexedSequence IndexedSequence::constant(const DyadicSystem& system, double value) {
  return over(system, std::vector<double>(system.count(), value));
}

std::vector<double> rearrange(std::span<const double> values) {
  for (double v : values)
    if (!(v >= 0.0)) throw std::invalid_argument("rearrangement of a negative value");
  std::vector<double> out(values.begin(), values.end());
  std::stable_sort(out.begin(), out.end(), std::greater<>());
  return out;
}

std::vector<double> rearrange(const IndexedSequence& s) {
  // Entries are ordered by key first so that ties stay in key order.
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.keys[a] < s.keys[b]; });
  std::vector<double> by_key;
  by_key.reserve(s.size());
  for (std::size_t i : order) by_key.push_back(s.values[i]);
  return rearrange(std::span<const double>(by_key));
}

double lorentz_norm(std::span<const double> values, double p, double q) {
  if (!(p > 0.0)) throw std::invalid_argument("Lorentz exponent p must be positive");
  if (!(q > 0.0)) throw std::invalid_argument("Lorentz exponent q must be positive or infinite");
  const auto a = rearrange(values);
  if (std::isinf(q)) {
    double best = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
      best = std::max(best, std::pow(static_cast<double>(k + 1), 1.0 / p) * a[k]);
    return best;
  }
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    s += std::pow(a[k], q) * std::pow(static_cast<double>(k + 1), q / p - 1.0);
  return std::pow(s, 1.0 / q);
}

double lorentz_norm(const IndexedSequence& s, double p, double q) {
  return lorentz_norm(std::span<const double>(s.values), p, q);
}

double lp_norm(std::span<const double> values, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("exponent must be positive");
  double s = 0.0;
  for (double v : values) s += std::pow(std::abs(v), p);
  return std::pow(s, 1.0 / p);
}

IndexedSequence maximal_neighbor(const IndexedSequence& s, const DyadicSystem& system, double c) {
  require_system_sequence(s, system);
  std::vector<double> out(s.size(), 0.0);
  for (int k = 0; k <= system.depth(); ++k) {
    const auto cubes = system.level_cubes(k);
    for (const auto& q : cubes) {
      const WrappedBox window = enlarge_box(q, c);
      double sum = 0.0;
      for (const auto& p : cubes)
        if (meets(p, window)) sum += s.values[system.ordinal(p)];
      out[system.ordinal(q)] = sum;
    }
  }
  return IndexedSequence(s.keys, std::move(out));
}

IndexedSequence maximal_logweighted(const IndexedSequence& s, const DyadicSystem& system,
                                    const Weight& mu, double c) {
  require_system_sequence(s, system);
  std::vector<double> mass(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) mass[i] = mu.mass(system.at_ordinal(i));
  std::vector<double> out(s.size(), 0.0);
  for (const auto& q : system.all()) {
    const WrappedBox window = enlarge_box(q, c);
    double sum = 0.0;
    for (int j = q.level; j <= system.depth(); ++j) {
      const double weight = (j - q.level + 1.0) * (j - q.level + 1.0);
      for (const auto& p : system.level_cubes(j)) {
        if (!meets(p, window)) continue;
        const std::size_t o = system.ordinal(p);
        sum += mass[o] * weight * s.values[o] * s.values[o];
      }
    }
    const std::size_t oq = system.ordinal(q);
    out[oq] = std::sqrt(sum / mass[oq]);
  }
  return IndexedSequence(s.keys, std::move(out));
}

CarlesonResult maximal_carleson(const IndexedSequence& s, const DyadicSystem& system,
                                const Weight* nu, CarlesonMode mode, double c,
                                bool literal_summand) {
  require_system_sequence(s, system);
  std::vector<double> out(s.size(), 0.0);
  const int L = system.depth();
  if (mode == CarlesonMode::lebesgue) {
    if (literal_summand) {
      for (const auto& p : system.all())
        out[system.ordinal(p)] = (L - p.level + 1.0) * s.values[system.ordinal(p)];
    } else {
      // tree[P] = sum over descendants R (P included) of s(R)|R|
      std::vector<double> tree(s.size(), 0.0);
      const unsigned nchild = 1u << system.grid().dim();
      for (int k = L; k >= 0; --k)
        for (const auto& p : system.level_cubes(k)) {
          const std::size_t o = system.ordinal(p);
          double t = s.values[o] * p.volume();
          if (k < L)
            for (unsigned pos = 0; pos < nchild; ++pos) t += tree[system.ordinal(system.child_at(p, pos))];
          tree[o] = t;
          out[o] = t / p.volume();
        }
    }
  } else {
    if (!nu) throw std::invalid_argument("descendant mode needs a weight");
    std::vector<double> mass(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) mass[i] = nu->mass(system.at_ordinal(i));
    for (const auto& q : system.all()) {
      const WrappedBox window = enlarge_box(q, c);
      double sum = 0.0;
      for (int j = q.level; j <= L; ++j)
        for (const auto& p : system.level_cubes(j))
          if (inside(p, window)) {
            const std::size_t o = system.ordinal(p);
            sum += mass[o] * s.values[o];
          }
      out[system.ordinal(q)] = sum / mass[system.ordinal(q)];
    }
  }
  CarlesonResult r;
  r.cmd_norm = out.empty() ? 0.0 : *std::max_element(out.begin(), out.end());
  r.values = IndexedSequence(s.keys, std::move(out));
  return r;
}

}  // namespace wcomm
