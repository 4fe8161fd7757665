#pragma once

// Uniform-grid level-set fields: reinitialization, the central-difference
// curvature discretization, interface-node detection, projection onto the
// zero isocontour and the compound numerical estimator built from them.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hcurv {

/// Gradient magnitudes below this are treated as locally degenerate.
inline constexpr double kGradientEpsilon = 1e-10;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Grid node index pair; (i, j) sits at (x_lo + i h, y_lo + j h).
struct Node {
  int i = 0;
  int j = 0;

  friend bool operator==(const Node&, const Node&) = default;
};

class Grid {
 public:
  Grid() = default;
  /// Throws std::invalid_argument unless nx, ny >= 5 and h > 0.
  Grid(int nx, int ny, double x_lo, double y_lo, double h);

  /// Square grid covering [lo, hi]^2 with nodes on lo + i h.
  static Grid square(double lo, double hi, double h);
  /// Square grid whose nodes are integer multiples of h, covering [-half, half]^2.
  static Grid centered(double half_width, double h);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double x_lo() const { return x_lo_; }
  double y_lo() const { return y_lo_; }
  double h() const { return h_; }
  std::size_t size() const { return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_); }

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i);
  }
  std::size_t index(Node n) const { return index(n.i, n.j); }
  Point point(int i, int j) const { return {x_lo_ + i * h_, y_lo_ + j * h_}; }
  Point point(Node n) const { return point(n.i, n.j); }

  /// True when the node has a full 3x3 neighbourhood.
  bool is_interior(Node n) const { return n.i >= 1 && n.j >= 1 && n.i <= nx_ - 2 && n.j <= ny_ - 2; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int nx_ = 0;
  int ny_ = 0;
  double x_lo_ = 0.0;
  double y_lo_ = 0.0;
  double h_ = 0.0;
};

class LevelSetField {
 public:
  LevelSetField() = default;
  /// Throws std::invalid_argument on size mismatch or non-finite values.
  LevelSetField(Grid grid, std::vector<double> phi);

  template <typename Fn>
  static LevelSetField sample(const Grid& grid, Fn&& fn) {
    std::vector<double> phi(grid.size());
    for (int j = 0; j < grid.ny(); ++j)
      for (int i = 0; i < grid.nx(); ++i) phi[grid.index(i, j)] = fn(grid.point(i, j));
    return LevelSetField(grid, std::move(phi));
  }

  const Grid& grid() const { return grid_; }
  const std::vector<double>& values() const { return phi_; }
  double operator()(int i, int j) const { return phi_[grid_.index(i, j)]; }
  double operator()(Node n) const { return phi_[grid_.index(n)]; }

  LevelSetField negated() const;

 private:
  Grid grid_;
  std::vector<double> phi_;
};

/// Nine level-set values in row-major order, top row first:
/// (i-1,j+1) (i,j+1) (i+1,j+1) / (i-1,j) (i,j) (i+1,j) / (i-1,j-1) (i,j-1) (i+1,j-1).
struct Stencil9 {
  std::array<double, 9> values{};
  double h = 0.0;

  double center() const { return values[4]; }
  friend bool operator==(const Stencil9&, const Stencil9&) = default;
};

/// Sign-change test against the four edge neighbours (products <= 0).
bool is_interface_adjacent(const std::array<double, 9>& values);

/// Per-node curvature; boundary and degenerate-gradient nodes are unavailable.
class CurvatureField {
 public:
  CurvatureField(Grid grid, std::vector<double> kappa, std::vector<unsigned char> valid)
      : grid_(std::move(grid)), kappa_(std::move(kappa)), valid_(std::move(valid)) {}

  const Grid& grid() const { return grid_; }
  std::optional<double> at(int i, int j) const {
    const auto k = grid_.index(i, j);
    if (!valid_[k]) return std::nullopt;
    return kappa_[k];
  }
  std::optional<double> at(Node n) const { return at(n.i, n.j); }

 private:
  Grid grid_;
  std::vector<double> kappa_;
  std::vector<unsigned char> valid_;
};

/// Pseudo-time redistancing, step h/2 with Heun's method. Godunov upwinding
/// with minmod second-order one-sided differences, sign(phi0) frozen from the
/// input. Nodes next to a sign change relax toward a distance taken from a
/// quadratic Taylor model of phi0 along its normal.
LevelSetField reinitialize(const LevelSetField& field, int iterations);

/// kappa = (pxx py^2 - 2 px py pxy + pyy px^2) / (px^2 + py^2)^{3/2}, central differences.
CurvatureField numerical_curvature_field(const LevelSetField& field);

/// Nodes with a sign change to an edge neighbour, in ascending node-index
/// order. Nodes within two layers of the boundary are excluded so that both
/// the stencil and the interpolation cell of the projected point stay inside.
std::vector<Node> interface_nodes(const LevelSetField& field);

struct Projection {
  Point point;
  bool clamped = false;
};

/// x - phi grad(phi) / |grad(phi)|. Throws DegenerateGradient.
Projection project_to_interface(const LevelSetField& field, Node node);

struct NumericalEstimate {
  double hk = 0.0;
  bool clamped = false;   // projection or interpolation cell was clamped
  bool fallback = false;  // a cell corner lacked curvature; centre value used
};

/// G_h: curvature field bilinearly interpolated at the projected point, times h.
NumericalEstimate compound_numerical(const LevelSetField& field, Node node);
NumericalEstimate compound_numerical(const LevelSetField& field, const CurvatureField& kappa, Node node);

/// Throws std::out_of_range unless the node has a full 3x3 neighbourhood.
Stencil9 stencil_extract(const LevelSetField& field, Node node);

// Flat text snapshot: "nx ny x_lo y_lo h" then nx*ny values, row j = 0 first.
void write_field(std::ostream& out, const LevelSetField& field);
LevelSetField read_field(std::istream& in, const std::string& source = "<stream>");
void save_field(const LevelSetField& field, const std::string& path);
LevelSetField load_field(const std::string& path);

}  // namespace hcurv
