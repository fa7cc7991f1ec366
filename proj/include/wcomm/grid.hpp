#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace wcomm {

inline constexpr int kMaxDim = 4;
using IVec = std::array<int, kMaxDim>;

// Periodic sample lattice on [0,1)^n with N = 3 * 2^L cells per axis.
class TorusGrid {
 public:
  TorusGrid(int n, int L);

  int dim() const { return n_; }
  int depth() const { return L_; }
  int side() const { return N_; }
  double h() const { return 1.0 / N_; }
  double cell_volume() const { return cell_volume_; }
  std::size_t cell_count() const { return cells_; }

  std::size_t flatten(const IVec& idx) const;
  IVec unflatten(std::size_t flat) const;
  // Reduces each coordinate into [0, N).
  IVec wrap(IVec idx) const;
  // Signed minimal-image displacement per axis, in cells; ties at N/2 give +N/2.
  int min_image(int delta_cells) const;

  bool operator==(const TorusGrid& o) const { return n_ == o.n_ && L_ == o.L_; }

 private:
  int n_;
  int L_;
  int N_;
  std::size_t cells_;
  double cell_volume_;
};

// Real function sampled on the cells of a grid (piecewise constant).
class GridFunction {
 public:
  explicit GridFunction(const TorusGrid& grid, double fill = 0.0);
  GridFunction(const TorusGrid& grid, std::vector<double> values);

  const TorusGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  GridFunction& operator+=(const GridFunction& o);
  GridFunction& operator-=(const GridFunction& o);
  GridFunction& operator*=(double s);

  static GridFunction from(const TorusGrid& grid,
                           const std::function<double(std::span<const double>)>& f);

 private:
  TorusGrid grid_;
  std::vector<double> values_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(GridFunction a, double s);
GridFunction pointwise_product(const GridFunction& a, const GridFunction& b);

// Discrete inner product h^n * sum f g.
double inner(const GridFunction& f, const GridFunction& g);
double l2_norm(const GridFunction& f);
double lp_norm(const GridFunction& f, double p);
bool all_finite(const GridFunction& f);

// Half-open axis-aligned box on the torus. Each axis covers [lo, lo+len) mod N.
struct WrappedBox {
  IVec lo{};
  IVec len{};
};

class Region {
 public:
  explicit Region(const TorusGrid& grid) : grid_(grid) {}
  Region(const TorusGrid& grid, std::vector<WrappedBox> boxes);

  const TorusGrid& grid() const { return grid_; }
  const std::vector<WrappedBox>& boxes() const { return boxes_; }
  bool empty() const;
  std::size_t cell_count() const;
  double measure() const;
  bool contains_cell(const IVec& cell) const;
  void for_each_cell(const std::function<void(std::size_t)>& visit) const;
  std::vector<std::size_t> cells() const;

  // Splits every wrapped box into non-wrapping pieces (lo + len <= N per axis).
  std::vector<WrappedBox> unwrapped() const;

 private:
  TorusGrid grid_;
  std::vector<WrappedBox> boxes_;
};

// Stable identity of a cube: shift index in [0, 3^n), level, row-major flattened m.
struct CubeKey {
  int omega = 0;
  int level = 0;
  std::int64_t m = 0;
  auto operator<=>(const CubeKey&) const = default;
};

struct DyadicCube {
  int n = 0;
  int grid_side = 0;  // N of the owning grid
  int omega = 0;
  int level = 0;
  IVec m{};
  IVec anchor{};  // in cells
  int side = 0;   // in cells
  std::int64_t flat_m = 0;

  CubeKey key() const { return {omega, level, flat_m}; }
  double length() const;  // side length 2^{-k}
  double volume() const;
  bool contains_cell(const IVec& cell) const;
  // Exact cell-aligned containment of a box (all axes).
  bool contains_box(const WrappedBox& box) const;
  WrappedBox box() const;
  // Center coordinate along an axis in half-cell units (2 * center in cells).
  int center_twice(int axis) const { return 2 * anchor[axis] + side; }
  bool operator==(const DyadicCube& o) const { return key() == o.key(); }
};

// Shift vector omega in {0,1/3,2/3}^n encoded as digits j_i in {0,1,2}.
struct Shift {
  IVec digits{};
  int n = 0;

  static Shift from_index(int n, int index);
  static Shift from_values(std::span<const double> omega);
  int index() const;  // digit 0 is most significant
};

class DyadicSystem {
 public:
  DyadicSystem(const TorusGrid& grid, const Shift& shift);

  const TorusGrid& grid() const { return grid_; }
  const Shift& shift() const { return shift_; }
  int omega() const { return omega_index_; }
  int depth() const { return grid_.depth(); }

  std::size_t count() const { return total_; }
  std::size_t count_at(int level) const;
  std::size_t ordinal(const DyadicCube& q) const;
  std::size_t level_offset(int level) const { return level_offset_[level]; }

  const DyadicCube& cube(int level, std::int64_t flat_m) const;
  const DyadicCube& at_ordinal(std::size_t ordinal) const { return cubes_[ordinal]; }
  std::span<const DyadicCube> level_cubes(int level) const;
  std::span<const DyadicCube> all() const { return cubes_; }

  // Children ordered by position bits t: bit (n-1-i) set means the upper half on axis i.
  std::vector<DyadicCube> children(const DyadicCube& q) const;
  const DyadicCube& child_at(const DyadicCube& q, unsigned position) const;
  const DyadicCube& parent(const DyadicCube& q) const;

  // Flattened index of the level-k cube containing the given cell.
  std::int64_t owner(int level, std::size_t cell) const { return owners_[level][cell]; }
  std::int64_t owner_of(int level, const IVec& cell) const;
  std::span<const std::int32_t> owners(int level) const { return owners_[level]; }

  Region region(const DyadicCube& q) const;
  std::vector<std::size_t> cells(const DyadicCube& q) const;

 private:
  int axis_offset(int level) const;

  TorusGrid grid_;
  Shift shift_;
  int omega_index_;
  std::vector<IVec> offsets_;  // per level, per axis anchor offset in cells
  std::vector<std::size_t> level_offset_;
  std::size_t total_ = 0;
  std::vector<DyadicCube> cubes_;
  std::vector<std::vector<std::int32_t>> owners_;
};

DyadicSystem build_system(const TorusGrid& grid, const Shift& shift);
// All 3^n shifted systems in shift-index order.
std::vector<DyadicSystem> all_systems(const TorusGrid& grid);

// Concentric enlargement snapped outward to cell boundaries; whole torus when c*l >= 1.
Region enlarge(const DyadicCube& q, double c, const TorusGrid& grid);
WrappedBox enlarge_box(const DyadicCube& q, double c);

struct ContainingCube {
  int omega = 0;
  DyadicCube cube;
  bool torus_scale = false;  // no containing cube below level 0 was found
  double volume_ratio = 0.0; // |Q| / |B|
};

ContainingCube containing_cube(const Region& b, std::span<const DyadicSystem> systems);

// Torus distance between cube centers, in units of the unit torus.
double center_distance(const DyadicCube& a, const DyadicCube& b);
// Squared minimal-image center separation in quarter-cell units (exact integer).
std::int64_t center_distance_sq_x4(const DyadicCube& a, const DyadicCube& b);

struct WhitneyPair {
  DyadicCube first;
  DyadicCube second;
  double distance = 0.0;
};

// Pairs a cube with a same-level partner whose separation is at least 3*sqrt(n)*l,
// and at most 9*sqrt(n)*l when the torus is large enough to express that bound.
WhitneyPair make_whitney_pair(const DyadicCube& a, const DyadicCube& b);
std::vector<WhitneyPair> whitney_pairs(const DyadicSystem& system, std::span<const int> levels);

}  // namespace wcomm
