#include "truncfilter/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace truncfilter {

StateGrid::StateGrid(int dim, std::span<const double> lo, std::span<const double> hi,
                     std::span<const int> n)
    : dim_(dim) {
  if (dim != 1 && dim != 2) {
    throw Error(ErrorCode::InvalidArgument, "grid dimension must be 1 or 2, got " + std::to_string(dim));
  }
  const auto d = static_cast<std::size_t>(dim);
  if (lo.size() != d || hi.size() != d || n.size() != d) {
    throw Error(ErrorCode::InvalidArgument, "grid bounds/resolution must have one entry per axis");
  }
  for (std::size_t a = 0; a < d; ++a) {
    if (!(lo[a] < hi[a])) {
      throw Error(ErrorCode::InvalidBounds, "axis " + std::to_string(a) + ": lo must be < hi");
    }
    if (n[a] < 2) {
      throw Error(ErrorCode::InvalidResolution, "axis " + std::to_string(a) + ": need at least 2 cells");
    }
  }
  lo_.assign(lo.begin(), lo.end());
  hi_.assign(hi.begin(), hi.end());
  n_.assign(n.begin(), n.end());

  volume_ = 1.0;
  axis_centers_.resize(d);
  for (std::size_t a = 0; a < d; ++a) {
    const double h = (hi_[a] - lo_[a]) / n_[a];
    volume_ *= h;
    auto& c = axis_centers_[a];
    c.resize(static_cast<std::size_t>(n_[a]));
    for (int i = 0; i < n_[a]; ++i) c[static_cast<std::size_t>(i)] = lo_[a] + (i + 0.5) * h;
  }

  const int n1 = dim_ == 2 ? n_[1] : 1;
  centers_.reserve(static_cast<std::size_t>(n_[0]) * static_cast<std::size_t>(n1));
  for (int i1 = 0; i1 < n1; ++i1) {
    for (int i0 = 0; i0 < n_[0]; ++i0) {
      Point p = Point::Zero();
      p[0] = axis_centers_[0][static_cast<std::size_t>(i0)];
      if (dim_ == 2) p[1] = axis_centers_[1][static_cast<std::size_t>(i1)];
      centers_.push_back(p);
    }
  }
}

double StateGrid::cell_width() const {
  double w = spacing(0);
  if (dim_ == 2) w = std::min(w, spacing(1));
  return w;
}

int StateGrid::locate(const Point& p) const {
  int idx[2] = {0, 0};
  for (int a = 0; a < dim_; ++a) {
    const double h = spacing(a);
    int i = static_cast<int>(std::floor((p[a] - lo_[static_cast<std::size_t>(a)]) / h));
    idx[a] = std::clamp(i, 0, n_[static_cast<std::size_t>(a)] - 1);
  }
  return index(idx[0], idx[1]);
}

bool StateGrid::on_boundary(int cell) const {
  const int i0 = cell % n_[0];
  if (i0 == 0 || i0 == n_[0] - 1) return true;
  if (dim_ == 2) {
    const int i1 = cell / n_[0];
    if (i1 == 0 || i1 == n_[1] - 1) return true;
  }
  return false;
}

std::vector<int> StateGrid::neighbours(int cell) const {
  std::vector<int> out;
  const int i0 = cell % n_[0];
  const int i1 = cell / n_[0];
  if (i0 > 0) out.push_back(index(i0 - 1, i1));
  if (i0 + 1 < n_[0]) out.push_back(index(i0 + 1, i1));
  if (dim_ == 2) {
    if (i1 > 0) out.push_back(index(i0, i1 - 1));
    if (i1 + 1 < n_[1]) out.push_back(index(i0, i1 + 1));
  }
  return out;
}

bool StateGrid::same_geometry(const StateGrid& other) const {
  return dim_ == other.dim_ && lo_ == other.lo_ && hi_ == other.hi_ && n_ == other.n_;
}

GridPtr make_grid(int dim, std::span<const double> lo, std::span<const double> hi,
                  std::span<const int> n) {
  return std::make_shared<const StateGrid>(dim, lo, hi, n);
}

GridPtr make_grid_1d(double lo, double hi, int n) {
  const double l[] = {lo};
  const double h[] = {hi};
  const int c[] = {n};
  return make_grid(1, l, h, c);
}

GridPtr make_grid_2d(const Point& lo, const Point& hi, int n0, int n1) {
  const double l[] = {lo[0], lo[1]};
  const double h[] = {hi[0], hi[1]};
  const int c[] = {n0, n1};
  return make_grid(2, l, h, c);
}

void require_same_grid(const StateGrid& a, const StateGrid& b, const char* where) {
  if (&a != &b && !a.same_geometry(b)) {
    throw Error(ErrorCode::GridMismatch, std::string(where) + ": operands live on different grids");
  }
}

// ---------------------------------------------------------------------------

CellMask CellMask::of(int cells, std::initializer_list<int> members) {
  CellMask m(cells);
  for (int c : members) m.set(c);
  return m;
}

int CellMask::count() const {
  return static_cast<int>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

CellMask CellMask::complement() const {
  CellMask out(size());
  for (int i = 0; i < size(); ++i) out.set(i, !(*this)[i]);
  return out;
}

bool CellMask::subset_of(const CellMask& other) const {
  for (int i = 0; i < size(); ++i) {
    if ((*this)[i] && !other[i]) return false;
  }
  return true;
}

Eigen::VectorXd CellMask::indicator() const {
  Eigen::VectorXd v(size());
  for (int i = 0; i < size(); ++i) v[i] = (*this)[i] ? 1.0 : 0.0;
  return v;
}

std::vector<int> CellMask::members() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) {
    if ((*this)[i]) out.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------

GridFunction::GridFunction(GridPtr grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->size()) {
    throw Error(ErrorCode::GridMismatch, "function length does not match the grid");
  }
  if (!values_.allFinite()) throw Error(ErrorCode::InvalidArgument, "grid function has non-finite entries");
}

GridFunction GridFunction::constant(GridPtr grid, double c) {
  const int n = grid->size();
  return GridFunction(std::move(grid), Eigen::VectorXd::Constant(n, c));
}

GridFunction GridFunction::from(GridPtr grid, const std::function<double(const Point&)>& f) {
  Eigen::VectorXd v(grid->size());
  for (int i = 0; i < grid->size(); ++i) v[i] = f(grid->center(i));
  return GridFunction(std::move(grid), std::move(v));
}

// ---------------------------------------------------------------------------

GridMeasure::GridMeasure(GridPtr grid, Eigen::VectorXd weights)
    : grid_(std::move(grid)), weights_(std::move(weights)) {
  if (weights_.size() != grid_->size()) {
    throw Error(ErrorCode::GridMismatch, "measure length does not match the grid");
  }
  if (!weights_.allFinite() || (weights_.array() < 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "measure weights must be finite and nonnegative");
  }
  mass_ = weights_.sum();
}

GridMeasure GridMeasure::zero(GridPtr grid) {
  const int n = grid->size();
  return GridMeasure(std::move(grid), Eigen::VectorXd::Zero(n));
}

GridMeasure GridMeasure::uniform(GridPtr grid) {
  const int n = grid->size();
  return GridMeasure(std::move(grid), Eigen::VectorXd::Constant(n, 1.0 / n));
}

GridMeasure GridMeasure::point_mass(GridPtr grid, int cell) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(grid->size());
  w[cell] = 1.0;
  return GridMeasure(std::move(grid), std::move(w));
}

GridMeasure GridMeasure::normalize() const {
  if (!(mass_ > 0.0)) throw Error(ErrorCode::ZeroMass, "cannot normalise a measure with zero mass");
  return GridMeasure(grid_, weights_ / mass_);
}

double GridMeasure::mass_in(const CellMask& mask) const {
  double s = 0.0;
  for (int i = 0; i < size(); ++i) {
    if (mask[i]) s += weights_[i];
  }
  return s;
}

double GridMeasure::boundary_mass() const {
  double s = 0.0;
  for (int i = 0; i < size(); ++i) {
    if (grid_->on_boundary(i)) s += weights_[i];
  }
  return s;
}

Point GridMeasure::mean() const {
  Point m = Point::Zero();
  for (int i = 0; i < size(); ++i) m += weights_[i] * grid_->center(i);
  return m / mass_;
}

Point GridMeasure::variance() const {
  const Point m = mean();
  Point v = Point::Zero();
  for (int i = 0; i < size(); ++i) {
    const Point d = grid_->center(i) - m;
    v += weights_[i] * d.cwiseProduct(d);
  }
  return v / mass_;
}

GridMeasure discretize_density(const std::function<double(const Point&)>& pdf, GridPtr grid) {
  Eigen::VectorXd w(grid->size());
  for (int i = 0; i < grid->size(); ++i) {
    const double p = pdf(grid->center(i));
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorCode::InvalidArgument, "density must be finite and nonnegative at every centre");
    }
    w[i] = p * grid->cell_volume();
  }
  const double total = w.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::ZeroMass, "density vanishes on every cell centre");
  return GridMeasure(std::move(grid), w / total);
}

double integrate(const GridFunction& f, const GridMeasure& mu) {
  require_same_grid(f.grid(), mu.grid(), "integrate");
  return f.values().dot(mu.weights());
}

GridMeasure restrict(const GridMeasure& mu, const CellMask& mask) {
  if (mask.size() != mu.size()) throw Error(ErrorCode::GridMismatch, "restrict: mask size differs from grid");
  return GridMeasure(mu.grid_ptr(), mu.weights().cwiseProduct(mask.indicator()));
}

}  // namespace truncfilter
