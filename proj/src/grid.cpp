#include "wcomm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wcomm {

namespace {

int mod(int a, int m) {
  int r = a % m;
  return r < 0 ? r + m : r;
}

int ipow(int base, int e) {
  int r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// Odometer over the cells of one wrapped box.
void visit_box(const TorusGrid& grid, const WrappedBox& box,
               const std::function<void(std::size_t)>& visit) {
  const int n = grid.dim();
  for (int i = 0; i < n; ++i)
    if (box.len[i] <= 0) return;
  IVec off{};
  while (true) {
    IVec cell{};
    for (int i = 0; i < n; ++i) cell[i] = mod(box.lo[i] + off[i], grid.side());
    visit(grid.flatten(cell));
    int axis = n - 1;
    while (axis >= 0) {
      if (++off[axis] < box.len[axis]) break;
      off[axis] = 0;
      --axis;
    }
    if (axis < 0) return;
  }
}

}  // namespace

TorusGrid::TorusGrid(int n, int L) : n_(n), L_(L) {
  if (n < 1 || n > kMaxDim) throw std::invalid_argument("grid dimension out of range");
  if (L < 1 || L > 12) throw std::invalid_argument("grid depth out of range");
  N_ = 3 * (1 << L);
  cells_ = 1;
  for (int i = 0; i < n; ++i) cells_ *= static_cast<std::size_t>(N_);
  cell_volume_ = std::pow(1.0 / N_, n);
}

std::size_t TorusGrid::flatten(const IVec& idx) const {
  std::size_t flat = 0;
  for (int i = 0; i < n_; ++i) flat = flat * N_ + static_cast<std::size_t>(idx[i]);
  return flat;
}

IVec TorusGrid::unflatten(std::size_t flat) const {
  IVec idx{};
  for (int i = n_ - 1; i >= 0; --i) {
    idx[i] = static_cast<int>(flat % N_);
    flat /= N_;
  }
  return idx;
}

IVec TorusGrid::wrap(IVec idx) const {
  for (int i = 0; i < n_; ++i) idx[i] = mod(idx[i], N_);
  return idx;
}

int TorusGrid::min_image(int delta) const {
  int d = mod(delta, N_);
  return d > N_ / 2 ? d - N_ : d;
}

GridFunction::GridFunction(const TorusGrid& grid, double fill)
    : grid_(grid), values_(grid.cell_count(), fill) {}

GridFunction::GridFunction(const TorusGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid.cell_count())
    throw std::invalid_argument("grid function size does not match the grid");
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  if (!(grid_ == o.grid_)) throw std::invalid_argument("grid mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
  if (!(grid_ == o.grid_)) throw std::invalid_argument("grid mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

GridFunction& GridFunction::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

GridFunction GridFunction::from(const TorusGrid& grid,
                                const std::function<double(std::span<const double>)>& f) {
  GridFunction out(grid);
  std::array<double, kMaxDim> x{};
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const IVec idx = grid.unflatten(c);
    for (int i = 0; i < grid.dim(); ++i) x[i] = (idx[i] + 0.5) * grid.h();
    out[c] = f(std::span<const double>(x.data(), grid.dim()));
  }
  return out;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(GridFunction a, double s) { return a *= s; }

GridFunction pointwise_product(const GridFunction& a, const GridFunction& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("grid mismatch");
  GridFunction out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

double inner(const GridFunction& f, const GridFunction& g) {
  if (!(f.grid() == g.grid())) throw std::invalid_argument("grid mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
  return s * f.grid().cell_volume();
}

double l2_norm(const GridFunction& f) { return std::sqrt(inner(f, f)); }

double lp_norm(const GridFunction& f, double p) {
  double s = 0.0;
  for (double v : f.values()) s += std::pow(std::abs(v), p);
  return std::pow(s * f.grid().cell_volume(), 1.0 / p);
}

bool all_finite(const GridFunction& f) {
  return std::all_of(f.values().begin(), f.values().end(),
                     [](double v) { return std::isfinite(v); });
}

Region::Region(const TorusGrid& grid, std::vector<WrappedBox> boxes)
    : grid_(grid), boxes_(std::move(boxes)) {
  for (auto& b : boxes_) {
    for (int i = 0; i < grid_.dim(); ++i) {
      if (b.len[i] < 0 || b.len[i] > grid_.side())
        throw std::invalid_argument("box extent out of range");
      b.lo[i] = mod(b.lo[i], grid_.side());
    }
  }
}

bool Region::empty() const { return cell_count() == 0; }

std::size_t Region::cell_count() const {
  std::size_t total = 0;
  for (const auto& b : boxes_) {
    std::size_t c = 1;
    for (int i = 0; i < grid_.dim(); ++i) c *= static_cast<std::size_t>(b.len[i]);
    total += c;
  }
  return total;
}

double Region::measure() const {
  return static_cast<double>(cell_count()) * grid_.cell_volume();
}

bool Region::contains_cell(const IVec& cell) const {
  for (const auto& b : boxes_) {
    bool inside = true;
    for (int i = 0; i < grid_.dim() && inside; ++i)
      inside = mod(cell[i] - b.lo[i], grid_.side()) < b.len[i];
    if (inside) return true;
  }
  return false;
}

void Region::for_each_cell(const std::function<void(std::size_t)>& visit) const {
  for (const auto& b : boxes_) visit_box(grid_, b, visit);
}

std::vector<std::size_t> Region::cells() const {
  std::vector<std::size_t> out;
  out.reserve(cell_count());
  for_each_cell([&](std::size_t c) { out.push_back(c); });
  return out;
}

std::vector<WrappedBox> Region::unwrapped() const {
  const int n = grid_.dim();
  const int N = grid_.side();
  std::vector<WrappedBox> out;
  for (const auto& b : boxes_) {
    std::vector<WrappedBox> pieces{WrappedBox{}};
    for (int i = 0; i < n; ++i) {
      std::vector<WrappedBox> next;
      const int lo = b.lo[i];
      const int len = b.len[i];
      if (len == 0) {
        pieces.clear();
        break;
      }
      for (const auto& p : pieces) {
        if (lo + len <= N) {
          WrappedBox q = p;
          q.lo[i] = lo;
          q.len[i] = len;
          next.push_back(q);
        } else {
          WrappedBox q1 = p, q2 = p;
          q1.lo[i] = lo;
          q1.len[i] = N - lo;
          q2.lo[i] = 0;
          q2.len[i] = lo + len - N;
          next.push_back(q1);
          next.push_back(q2);
        }
      }
      pieces = std::move(next);
    }
    out.insert(out.end(), pieces.begin(), pieces.end());
  }
  return out;
}

double DyadicCube::length() const { return static_cast<double>(side) / grid_side; }

double DyadicCube::volume() const { return std::pow(length(), n); }

bool DyadicCube::contains_cell(const IVec& cell) const {
  for (int i = 0; i < n; ++i)
    if (mod(cell[i] - anchor[i], grid_side) >= side) return false;
  return true;
}

bool DyadicCube::contains_box(const WrappedBox& b) const {
  for (int i = 0; i < n; ++i) {
    if (b.len[i] == 0) continue;
    if (side == grid_side) continue;
    if (mod(b.lo[i] - anchor[i], grid_side) + b.len[i] > side) return false;
  }
  return true;
}

WrappedBox DyadicCube::box() const {
  WrappedBox b;
  for (int i = 0; i < n; ++i) {
    b.lo[i] = anchor[i];
    b.len[i] = side;
  }
  return b;
}

Shift Shift::from_index(int n, int index) {
  if (n < 1 || n > kMaxDim || index < 0 || index >= ipow(3, n))
    throw std::invalid_argument("shift index out of range");
  Shift s;
  s.n = n;
  for (int i = n - 1; i >= 0; --i) {
    s.digits[i] = index % 3;
    index /= 3;
  }
  return s;
}

Shift Shift::from_values(std::span<const double> omega) {
  Shift s;
  s.n = static_cast<int>(omega.size());
  if (s.n < 1 || s.n > kMaxDim) throw std::invalid_argument("shift dimension out of range");
  for (int i = 0; i < s.n; ++i) {
    const double j = omega[i] * 3.0;
    const double r = std::round(j);
    if (std::abs(j - r) > 1e-12 || r < 0 || r > 2)
      throw std::invalid_argument("shift component must be 0, 1/3 or 2/3");
    s.digits[i] = static_cast<int>(r);
  }
  return s;
}

int Shift::index() const {
  int idx = 0;
  for (int i = 0; i < n; ++i) idx = idx * 3 + digits[i];
  return idx;
}

DyadicSystem::DyadicSystem(const TorusGrid& grid, const Shift& shift)
    : grid_(grid), shift_(shift) {
  const int n = grid.dim();
  const int L = grid.depth();
  const int N = grid.side();
  if (shift.n != n) throw std::invalid_argument("shift dimension does not match the grid");
  for (int i = 0; i < n; ++i)
    if (shift.digits[i] < 0 || shift.digits[i] > 2)
      throw std::invalid_argument("shift component must be 0, 1/3 or 2/3");
  omega_index_ = shift.index();

  offsets_.resize(L + 1);
  level_offset_.resize(L + 2);
  owners_.resize(L + 1);
  for (int k = 0; k <= L; ++k) {
    const int sign = (k % 2 == 0) ? 1 : -1;
    for (int i = 0; i < n; ++i)
      offsets_[k][i] = mod(sign * shift.digits[i] * (1 << (L - k)), N);
    level_offset_[k] = total_;
    total_ += static_cast<std::size_t>(1) << (k * n);
  }
  level_offset_[L + 1] = total_;

  cubes_.reserve(total_);
  for (int k = 0; k <= L; ++k) {
    const int per_axis = 1 << k;
    const int side = N >> k;
    const std::int64_t count = std::int64_t{1} << (k * n);
    for (std::int64_t flat = 0; flat < count; ++flat) {
      DyadicCube q;
      q.n = n;
      q.grid_side = N;
      q.omega = omega_index_;
      q.level = k;
      q.side = side;
      q.flat_m = flat;
      std::int64_t rest = flat;
      for (int i = n - 1; i >= 0; --i) {
        q.m[i] = static_cast<int>(rest % per_axis);
        rest /= per_axis;
      }
      for (int i = 0; i < n; ++i) q.anchor[i] = mod(offsets_[k][i] + q.m[i] * side, N);
      cubes_.push_back(q);
    }

    auto& own = owners_[k];
    own.resize(grid.cell_count());
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
      const IVec cell = grid.unflatten(c);
      std::int64_t flat = 0;
      for (int i = 0; i < n; ++i)
        flat = flat * per_axis + mod(cell[i] - offsets_[k][i], N) / side;
      own[c] = static_cast<std::int32_t>(flat);
    }
  }
}

std::size_t DyadicSystem::count_at(int level) const {
  if (level < 0 || level > depth()) throw std::out_of_range("level out of range");
  return level_offset_[level + 1] - level_offset_[level];
}

std::size_t DyadicSystem::ordinal(const DyadicCube& q) const {
  if (q.omega != omega_index_ || q.level < 0 || q.level > depth())
    throw std::invalid_argument("cube does not belong to this system");
  return level_offset_[q.level] + static_cast<std::size_t>(q.flat_m);
}

const DyadicCube& DyadicSystem::cube(int level, std::int64_t flat_m) const {
  if (level < 0 || level > depth() || flat_m < 0 ||
      static_cast<std::size_t>(flat_m) >= count_at(level))
    throw std::out_of_range("cube index out of range");
  return cubes_[level_offset_[level] + static_cast<std::size_t>(flat_m)];
}

std::span<const DyadicCube> DyadicSystem::level_cubes(int level) const {
  return std::span<const DyadicCube>(cubes_).subspan(level_offset_[level], count_at(level));
}

std::int64_t DyadicSystem::owner_of(int level, const IVec& cell) const {
  return owners_[level][grid_.flatten(grid_.wrap(cell))];
}

const DyadicCube& DyadicSystem::child_at(const DyadicCube& q, unsigned position) const {
  if (q.level >= depth()) throw std::invalid_argument("cube is at maximal depth");
  const int n = grid_.dim();
  const int half = q.side / 2;
  IVec cell = q.anchor;
  for (int i = 0; i < n; ++i)
    if (position & (1u << (n - 1 - i))) cell[i] += half;
  return cube(q.level + 1, owner_of(q.level + 1, cell));
}

std::vector<DyadicCube> DyadicSystem::children(const DyadicCube& q) const {
  std::vector<DyadicCube> out;
  const unsigned count = 1u << grid_.dim();
  out.reserve(count);
  for (unsigned t = 0; t < count; ++t) out.push_back(child_at(q, t));
  return out;
}

const DyadicCube& DyadicSystem::parent(const DyadicCube& q) const {
  if (q.level == 0) throw std::invalid_argument("level-0 cube has no parent");
  return cube(q.level - 1, owner_of(q.level - 1, q.anchor));
}

Region DyadicSystem::region(const DyadicCube& q) const { return Region(grid_, {q.box()}); }

std::vector<std::size_t> DyadicSystem::cells(const DyadicCube& q) const {
  return region(q).cells();
}

DyadicSystem build_system(const TorusGrid& grid, const Shift& shift) {
  return DyadicSystem(grid, shift);
}

std::vector<DyadicSystem> all_systems(const TorusGrid& grid) {
  std::vector<DyadicSystem> out;
  const int count = ipow(3, grid.dim());
  out.reserve(count);
  for (int w = 0; w < count; ++w) out.emplace_back(grid, Shift::from_index(grid.dim(), w));
  return out;
}

WrappedBox enlarge_box(const DyadicCube& q, double c) {
  if (!(c >= 1.0)) throw std::invalid_argument("enlargement factor must be at least 1");
  WrappedBox b;
  const int N = q.grid_side;
  if (c * q.length() >= 1.0) {
    for (int i = 0; i < q.n; ++i) {
      b.lo[i] = 0;
      b.len[i] = N;
    }
    return b;
  }
  constexpr double slack = 1e-9;
  for (int i = 0; i < q.n; ++i) {
    const double center = q.anchor[i] + 0.5 * q.side;
    const double half = 0.5 * c * q.side;
    const int lo = static_cast<int>(std::floor(center - half + slack));
    const int hi = static_cast<int>(std::ceil(center + half - slack));
    if (hi - lo >= N) {
      b.lo[i] = 0;
      b.len[i] = N;
    } else {
      b.lo[i] = mod(lo, N);
      b.len[i] = hi - lo;
    }
  }
  return b;
}

Region enlarge(const DyadicCube& q, double c, const TorusGrid& grid) {
  return Region(grid, {enlarge_box(q, c)});
}

ContainingCube containing_cube(const Region& b, std::span<const DyadicSystem> systems) {
  if (b.empty()) throw std::invalid_argument("containing_cube requires a nonempty region");
  if (systems.empty()) throw std::invalid_argument("no dyadic systems supplied");
  const TorusGrid& grid = b.grid();
  double diameter = 0.0;
  for (const auto& box : b.boxes()) {
    double d2 = 0.0;
    for (int i = 0; i < grid.dim(); ++i) d2 += static_cast<double>(box.len[i]) * box.len[i];
    diameter = std::max(diameter, std::sqrt(d2) * grid.h());
  }
  if (diameter >= 0.25) throw std::invalid_argument("region diameter must be below 1/4");

  IVec probe{};
  for (const auto& box : b.boxes()) {
    bool nonempty = true;
    for (int i = 0; i < grid.dim(); ++i) nonempty = nonempty && box.len[i] > 0;
    if (nonempty) {
      probe = box.lo;
      break;
    }
  }

  const DyadicCube* best = nullptr;
  for (const auto& sys : systems) {
    for (int k = sys.depth(); k >= 1; --k) {
      if (best && k <= best->level) break;
      const DyadicCube& q = sys.cube(k, sys.owner_of(k, probe));
      const bool ok = std::all_of(b.boxes().begin(), b.boxes().end(),
                                  [&](const WrappedBox& box) { return q.contains_box(box); });
      if (ok) {
        best = &q;
        break;
      }
    }
  }
  ContainingCube out;
  if (!best) {
    out.torus_scale = true;
    out.omega = systems.front().omega();
    out.cube = systems.front().cube(0, 0);
  } else {
    out.omega = best->omega;
    out.cube = *best;
  }
  out.volume_ratio = out.cube.volume() / b.measure();
  return out;
}

std::int64_t center_distance_sq_x4(const DyadicCube& a, const DyadicCube& b) {
  if (a.n != b.n || a.grid_side != b.grid_side)
    throw std::invalid_argument("cubes live on different grids");
  const int period = 2 * a.grid_side;
  std::int64_t total = 0;
  for (int i = 0; i < a.n; ++i) {
    int d = mod(a.center_twice(i) - b.center_twice(i), period);
    if (d > period / 2) d -= period;
    total += static_cast<std::int64_t>(d) * d;
  }
  return total;
}

double center_distance(const DyadicCube& a, const DyadicCube& b) {
  return 0.5 * std::sqrt(static_cast<double>(center_distance_sq_x4(a, b))) / a.grid_side;
}

namespace {

// Whitney window test in exact integer arithmetic: 36 n s^2 <= D^2 (<= 324 n s^2).
bool in_window(const DyadicCube& a, const DyadicCube& b, bool check_upper) {
  const std::int64_t d2 = center_distance_sq_x4(a, b);
  const std::int64_t s2 = static_cast<std::int64_t>(a.side) * a.side;
  if (d2 < 36 * a.n * s2) return false;
  return !check_upper || d2 <= 324 * a.n * s2;
}

bool upper_window_representable(int n, int level) {
  // 9 sqrt(n) 2^{-k} < 1/2  <=>  324 n < 4^k
  return 324LL * n < (1LL << (2 * level));
}

}  // namespace

WhitneyPair make_whitney_pair(const DyadicCube& a, const DyadicCube& b) {
  if (a.level != b.level || a.n != b.n || a.grid_side != b.grid_side)
    throw std::invalid_argument("Whitney pairs need cubes of equal size on one grid");
  // The largest torus distance is sqrt(n)/2; the upper bound binds only when 9 l < 1/2.
  const bool check_upper = 18 * a.side < a.grid_side;
  if (!in_window(a, b, check_upper))
    throw std::invalid_argument("cubes violate the Whitney separation window");
  return {a, b, center_distance(a, b)};
}

std::vector<WhitneyPair> whitney_pairs(const DyadicSystem& system, std::span<const int> levels) {
  const int n = system.grid().dim();
  std::vector<WhitneyPair> out;
  for (int k : levels) {
    if (k < 0 || k > system.depth()) throw std::out_of_range("level out of range");
    if (!upper_window_representable(n, k))
      throw std::invalid_argument("level too coarse for the Whitney separation window");
    const auto cubes = system.level_cubes(k);
    for (const auto& q : cubes)
      for (const auto& r : cubes)
        if (!(q == r) && in_window(q, r, true)) out.push_back({q, r, center_distance(q, r)});
  }
  return out;
}

}  // namespace wcomm
