#ifndef TRUNCFILTER_GRID_HPP
#define TRUNCFILTER_GRID_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "truncfilter/error.hpp"

namespace truncfilter {

/// A point of the state (or observation) space. Unused trailing coordinates
/// are held at zero, so 1-D models simply ignore `p[1]`.
using Point = Eigen::Vector2d;

/// Rectangular cell-centred discretisation of R^d, d in {1, 2}.
///
/// Cells are numbered with axis 0 varying fastest: cell = i0 + n0 * i1.
/// The cell volume plays the role of the reference measure on the grid, so a
/// measure stores mass per cell and a density is weight / cell_volume().
class StateGrid {
 public:
  StateGrid(int dim, std::span<const double> lo, std::span<const double> hi,
            std::span<const int> n);

  int dim() const noexcept { return dim_; }
  int size() const noexcept { return static_cast<int>(centers_.size()); }
  int cells(int axis) const { return n_.at(axis); }
  double lo(int axis) const { return lo_.at(axis); }
  double hi(int axis) const { return hi_.at(axis); }
  double spacing(int axis) const { return (hi_.at(axis) - lo_.at(axis)) / n_.at(axis); }
  /// Smallest per-axis spacing; radii of balls are quantised in this unit.
  double cell_width() const;
  double cell_volume() const noexcept { return volume_; }

  const std::vector<double>& axis_centers(int axis) const { return axis_centers_.at(axis); }
  const Point& center(int cell) const { return centers_[static_cast<std::size_t>(cell)]; }
  const std::vector<Point>& centers() const noexcept { return centers_; }

  int index(int i0, int i1 = 0) const { return i0 + n_[0] * i1; }
  /// Cell containing p (clamped to the grid).
  int locate(const Point& p) const;
  /// Outermost layer of cells along every axis.
  bool on_boundary(int cell) const;
  /// Grid neighbours (4-connectivity in 2-D).
  std::vector<int> neighbours(int cell) const;

  bool same_geometry(const StateGrid& other) const;

 private:
  int dim_;
  std::vector<double> lo_, hi_;
  std::vector<int> n_;
  std::vector<std::vector<double>> axis_centers_;
  std::vector<Point> centers_;
  double volume_;
};

using GridPtr = std::shared_ptr<const StateGrid>;

GridPtr make_grid(int dim, std::span<const double> lo, std::span<const double> hi,
                  std::span<const int> n);
GridPtr make_grid_1d(double lo, double hi, int n);
GridPtr make_grid_2d(const Point& lo, const Point& hi, int n0, int n1);

void require_same_grid(const StateGrid& a, const StateGrid& b, const char* where);

/// Boolean subset of grid cells.
class CellMask {
 public:
  CellMask() = default;
  explicit CellMask(int cells, bool value = false)
      : bits_(static_cast<std::size_t>(cells), value ? 1 : 0) {}
  explicit CellMask(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {}

  static CellMask full(int cells) { return CellMask(cells, true); }
  static CellMask of(int cells, std::initializer_list<int> members);

  int size() const noexcept { return static_cast<int>(bits_.size()); }
  bool operator[](int cell) const { return bits_[static_cast<std::size_t>(cell)] != 0; }
  void set(int cell, bool value = true) { bits_[static_cast<std::size_t>(cell)] = value ? 1 : 0; }
  int count() const;
  bool empty() const { return count() == 0; }
  bool all() const { return count() == size(); }
  CellMask complement() const;
  bool subset_of(const CellMask& other) const;
  /// 0/1 indicator vector.
  Eigen::VectorXd indicator() const;
  std::vector<int> members() const;

  bool operator==(const CellMask&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Real-valued function sampled at the cell centres (a test function, a potential, ...).
class GridFunction {
 public:
  GridFunction(GridPtr grid, Eigen::VectorXd values);
  static GridFunction constant(GridPtr grid, double c);
  static GridFunction from(GridPtr grid, const std::function<double(const Point&)>& f);

  const StateGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  double operator[](int cell) const { return values_[cell]; }
  double sup_norm() const { return values_.cwiseAbs().maxCoeff(); }
  bool nonnegative() const { return (values_.array() >= 0.0).all(); }

 private:
  GridPtr grid_;
  Eigen::VectorXd values_;
};

/// Nonnegative mass per cell. `normalized()` holds when |mass - 1| <= 1e-12.
class GridMeasure {
 public:
  static constexpr double kNormTolerance = 1e-12;

  GridMeasure(GridPtr grid, Eigen::VectorXd weights);
  static GridMeasure zero(GridPtr grid);
  static GridMeasure uniform(GridPtr grid);
  static GridMeasure point_mass(GridPtr grid, int cell);

  const StateGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  double operator[](int cell) const { return weights_[cell]; }
  int size() const { return static_cast<int>(weights_.size()); }

  double mass() const noexcept { return mass_; }
  bool normalized() const noexcept { return std::abs(mass_ - 1.0) <= kNormTolerance; }
  /// Rescaled copy with unit mass; throws ZeroMass for the null measure.
  GridMeasure normalize() const;

  double mass_in(const CellMask& mask) const;
  double boundary_mass() const;
  Point mean() const;
  /// Per-axis variance.
  Point variance() const;
  double density(int cell) const { return weights_[cell] / grid_->cell_volume(); }

 private:
  GridPtr grid_;
  Eigen::VectorXd weights_;
  double mass_;
};

/// Midpoint-rule discretisation: w_i = pdf(c_i) * vol, renormalised to unit mass.
GridMeasure discretize_density(const std::function<double(const Point&)>& pdf, GridPtr grid);

/// (f, mu) = sum_i f_i mu_i.
double integrate(const GridFunction& f, const GridMeasure& mu);

/// 1_S . mu
GridMeasure restrict(const GridMeasure& mu, const CellMask& mask);

}  // namespace truncfilter

#endif
