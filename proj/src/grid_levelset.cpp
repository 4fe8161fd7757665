#include "hcurv/grid_levelset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "hcurv/errors.hpp"

namespace hcurv {

namespace {

struct Gradient {
  double x = 0.0;
  double y = 0.0;
  double norm() const { return std::sqrt(x * x + y * y); }
};

Gradient central_gradient(const LevelSetField& f, Node n) {
  const double inv2h = 1.0 / (2.0 * f.grid().h());
  return {(f(n.i + 1, n.j) - f(n.i - 1, n.j)) * inv2h, (f(n.i, n.j + 1) - f(n.i, n.j - 1)) * inv2h};
}

double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return std::abs(a) < std::abs(b) ? a : b;
}

std::string node_str(Node n) { return "(" + std::to_string(n.i) + ", " + std::to_string(n.j) + ")"; }

}  // namespace

Grid::Grid(int nx, int ny, double x_lo, double y_lo, double h) : nx_(nx), ny_(ny), x_lo_(x_lo), y_lo_(y_lo), h_(h) {
  if (nx < 5 || ny < 5) throw std::invalid_argument("Grid: need at least 5 nodes per axis");
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("Grid: spacing must be positive");
  if (!std::isfinite(x_lo) || !std::isfinite(y_lo)) throw std::invalid_argument("Grid: corner must be finite");
}

Grid Grid::square(double lo, double hi, double h) {
  const auto n = static_cast<int>(std::lround((hi - lo) / h)) + 1;
  return Grid(n, n, lo, lo, h);
}

Grid Grid::centered(double half_width, double h) {
  const auto m = static_cast<int>(std::ceil(half_width / h - 1e-9));
  return Grid(2 * m + 1, 2 * m + 1, -m * h, -m * h, h);
}

LevelSetField::LevelSetField(Grid grid, std::vector<double> phi) : grid_(std::move(grid)), phi_(std::move(phi)) {
  if (phi_.size() != grid_.size()) throw std::invalid_argument("LevelSetField: value count does not match grid");
  for (double v : phi_)
    if (!std::isfinite(v)) throw std::invalid_argument("LevelSetField: non-finite level-set value");
}

LevelSetField LevelSetField::negated() const {
  std::vector<double> phi(phi_.size());
  std::transform(phi_.begin(), phi_.end(), phi.begin(), [](double v) { return -v; });
  return LevelSetField(grid_, std::move(phi));
}

bool is_interface_adjacent(const std::array<double, 9>& v) {
  const double c = v[4];
  return c * v[1] <= 0.0 || c * v[3] <= 0.0 || c * v[5] <= 0.0 || c * v[7] <= 0.0;
}

LevelSetField reinitialize(const LevelSetField& field, int iterations) {
  if (iterations < 0) throw std::invalid_argument("reinitialize: negative iteration count");
  if (iterations == 0) return field;

  const Grid& g = field.grid();
  const int nx = g.nx();
  const int ny = g.ny();
  const double h = g.h();
  const double dt = 0.5 * h;
  const double inv_h = 1.0 / h;
  const std::vector<double>& phi0 = field.values();
  const auto sx = static_cast<std::size_t>(nx);

  // Nodes with a sign change to a 4-neighbour get a fixed target distance
  // from phi0; everything else follows the upwind eikonal update.
  std::vector<double> sign(phi0.size());
  std::vector<double> target(phi0.size(), std::numeric_limits<double>::quiet_NaN());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = g.index(i, j);
      const double c = phi0[k];
      sign[k] = static_cast<double>((c > 0.0) - (c < 0.0));
      const double l = i > 0 ? phi0[k - 1] : c;
      const double r = i < nx - 1 ? phi0[k + 1] : c;
      const double d = j > 0 ? phi0[k - sx] : c;
      const double u = j < ny - 1 ? phi0[k + sx] : c;
      if (c == 0.0 || !(c * l < 0.0 || c * r < 0.0 || c * d < 0.0 || c * u < 0.0)) continue;
      const bool inner_x = i > 0 && i < nx - 1;
      const bool inner_y = j > 0 && j < ny - 1;
      const double gx = inner_x ? 0.5 * (r - l) : r - l;
      const double gy = inner_y ? 0.5 * (u - d) : u - d;
      const double central = std::hypot(gx, gy);
      const double slope = std::max({central, std::abs(r - c), std::abs(c - l), std::abs(u - c), std::abs(c - d)});
      target[k] = h * c / slope;
      if (!inner_x || !inner_y || central <= 0.5 * slope) continue;
      // Root of the quadratic Taylor model of phi0 along the normal line.
      const double a = central * inv_h;
      const double nxu = gx / central;
      const double nyu = gy / central;
      const double pxx = (r - 2.0 * c + l) * inv_h * inv_h;
      const double pyy = (u - 2.0 * c + d) * inv_h * inv_h;
      const double pxy = (phi0[k + sx + 1] - phi0[k + sx - 1] - phi0[k - sx + 1] + phi0[k - sx - 1]) * 0.25 * inv_h * inv_h;
      const double b = nxu * nxu * pxx + 2.0 * nxu * nyu * pxy + nyu * nyu * pyy;
      const double disc = a * a - 2.0 * b * c;
      target[k] = disc > 0.0 ? 2.0 * c / (a + std::sqrt(disc)) : c / a;
    }
  }

  auto rate = [&](const std::vector<double>& f, std::vector<double>& out) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const std::size_t k = g.index(i, j);
        const double s = sign[k];
        const double c = f[k];
        if (!std::isnan(target[k])) {
          out[k] = -inv_h * (s * std::abs(c) - target[k]);
          continue;
        }
        if (s == 0.0) {
          out[k] = 0.0;
          continue;
        }
        // One-sided differences; at the boundary the missing side copies the
        // available one. Away from it, minmod-limited second-order corrections.
        double dxm = i > 0 ? (c - f[k - 1]) * inv_h : 0.0;
        double dxp = i < nx - 1 ? (f[k + 1] - c) * inv_h : 0.0;
        if (i == 0) dxm = dxp;
        if (i == nx - 1) dxp = dxm;
        double dym = j > 0 ? (c - f[k - sx]) * inv_h : 0.0;
        double dyp = j < ny - 1 ? (f[k + sx] - c) * inv_h : 0.0;
        if (j == 0) dym = dyp;
        if (j == ny - 1) dyp = dym;
        if (i > 1 && i < nx - 2 && j > 1 && j < ny - 2) {
          const double xx = f[k + 1] - 2.0 * c + f[k - 1];
          const double yy = f[k + sx] - 2.0 * c + f[k - sx];
          dxm += 0.5 * inv_h * minmod(xx, c - 2.0 * f[k - 1] + f[k - 2]);
          dxp -= 0.5 * inv_h * minmod(xx, f[k + 2] - 2.0 * f[k + 1] + c);
          dym += 0.5 * inv_h * minmod(yy, c - 2.0 * f[k - sx] + f[k - 2 * sx]);
          dyp -= 0.5 * inv_h * minmod(yy, f[k + 2 * sx] - 2.0 * f[k + sx] + c);
        }
        double gx2 = 0.0;
        double gy2 = 0.0;
        if (s > 0.0) {
          gx2 = std::max(std::pow(std::max(dxm, 0.0), 2), std::pow(std::min(dxp, 0.0), 2));
          gy2 = std::max(std::pow(std::max(dym, 0.0), 2), std::pow(std::min(dyp, 0.0), 2));
        } else {
          gx2 = std::max(std::pow(std::min(dxm, 0.0), 2), std::pow(std::max(dxp, 0.0), 2));
          gy2 = std::max(std::pow(std::min(dym, 0.0), 2), std::pow(std::max(dyp, 0.0), 2));
        }
        out[k] = -s * (std::sqrt(gx2 + gy2) - 1.0);
      }
    }
  };

  // Heun's method.
  std::vector<double> cur = phi0;
  std::vector<double> stage(cur.size());
  std::vector<double> r1(cur.size());
  std::vector<double> r2(cur.size());
  for (int it = 0; it < iterations; ++it) {
    rate(cur, r1);
    for (std::size_t k = 0; k < cur.size(); ++k) stage[k] = cur[k] + dt * r1[k];
    rate(stage, r2);
    for (std::size_t k = 0; k < cur.size(); ++k) cur[k] = 0.5 * (cur[k] + stage[k] + dt * r2[k]);
  }
  return LevelSetField(g, std::move(cur));
}

CurvatureField numerical_curvature_field(const LevelSetField& field) {
  const Grid& g = field.grid();
  const double h = g.h();
  const double inv2h = 1.0 / (2.0 * h);
  const double invh2 = 1.0 / (h * h);
  const double inv4h2 = 1.0 / (4.0 * h * h);

  std::vector<double> kappa(g.size(), 0.0);
  std::vector<unsigned char> valid(g.size(), 0);
  for (int j = 1; j < g.ny() - 1; ++j) {
    for (int i = 1; i < g.nx() - 1; ++i) {
      const double c = field(i, j);
      const double e = field(i + 1, j);
      const double w = field(i - 1, j);
      const double n = field(i, j + 1);
      const double s = field(i, j - 1);
      const double px = (e - w) * inv2h;
      const double py = (n - s) * inv2h;
      const double grad2 = px * px + py * py;
      if (std::sqrt(grad2) < kGradientEpsilon) continue;
      const double pxx = (e - 2.0 * c + w) * invh2;
      const double pyy = (n - 2.0 * c + s) * invh2;
      const double pxy = (field(i + 1, j + 1) - field(i + 1, j - 1) - field(i - 1, j + 1) + field(i - 1, j - 1)) * inv4h2;
      const double num = pxx * py * py - 2.0 * px * py * pxy + pyy * px * px;
      const std::size_t k = g.index(i, j);
      kappa[k] = num / (grad2 * std::sqrt(grad2));
      valid[k] = 1;
    }
  }
  return CurvatureField(g, std::move(kappa), std::move(valid));
}

std::vector<Node> interface_nodes(const LevelSetField& field) {
  const Grid& g = field.grid();
  std::vector<Node> nodes;
  for (int j = 2; j < g.ny() - 2; ++j) {
    for (int i = 2; i < g.nx() - 2; ++i) {
      const double c = field(i, j);
      if (c * field(i + 1, j) <= 0.0 || c * field(i - 1, j) <= 0.0 || c * field(i, j + 1) <= 0.0 ||
          c * field(i, j - 1) <= 0.0)
        nodes.push_back({i, j});
    }
  }
  return nodes;
}

Projection project_to_interface(const LevelSetField& field, Node node) {
  const Grid& g = field.grid();
  if (!g.is_interior(node)) throw std::out_of_range("project_to_interface: node " + node_str(node) + " lacks neighbours");
  const Gradient grad = central_gradient(field, node);
  const double norm = grad.norm();
  if (norm < kGradientEpsilon) throw DegenerateGradient("degenerate gradient at node " + node_str(node));

  const double phi = field(node);
  const Point x = g.point(node);
  Projection p{{x.x - phi * grad.x / norm, x.y - phi * grad.y / norm}, false};

  const double lo_x = g.x_lo() + g.h();
  const double hi_x = g.x_lo() + (g.nx() - 2) * g.h();
  const double lo_y = g.y_lo() + g.h();
  const double hi_y = g.y_lo() + (g.ny() - 2) * g.h();
  const double cx = std::clamp(p.point.x, lo_x, hi_x);
  const double cy = std::clamp(p.point.y, lo_y, hi_y);
  if (cx != p.point.x || cy != p.point.y) {
    p.point = {cx, cy};
    p.clamped = true;
  }
  return p;
}

NumericalEstimate compound_numerical(const LevelSetField& field, Node node) {
  return compound_numerical(field, numerical_curvature_field(field), node);
}

NumericalEstimate compound_numerical(const LevelSetField& field, const CurvatureField& kappa, Node node) {
  const Grid& g = field.grid();
  const Projection proj = project_to_interface(field, node);
  NumericalEstimate est;
  est.clamped = proj.clamped;

  const double fx = (proj.point.x - g.x_lo()) / g.h();
  const double fy = (proj.point.y - g.y_lo()) / g.h();
  int ci = static_cast<int>(std::floor(fx));
  int cj = static_cast<int>(std::floor(fy));
  // Curvature exists on nodes 1..n-2, so lower-left corners live in 1..n-3.
  const int ci_c = std::clamp(ci, 1, g.nx() - 3);
  const int cj_c = std::clamp(cj, 1, g.ny() - 3);
  if (ci_c != ci || cj_c != cj) est.clamped = true;
  ci = ci_c;
  cj = cj_c;
  const double tx = std::clamp(fx - ci, 0.0, 1.0);
  const double ty = std::clamp(fy - cj, 0.0, 1.0);

  const auto k00 = kappa.at(ci, cj);
  const auto k10 = kappa.at(ci + 1, cj);
  const auto k01 = kappa.at(ci, cj + 1);
  const auto k11 = kappa.at(ci + 1, cj + 1);
  if (k00 && k10 && k01 && k11) {
    const double bottom = (1.0 - tx) * *k00 + tx * *k10;
    const double top = (1.0 - tx) * *k01 + tx * *k11;
    est.hk = g.h() * ((1.0 - ty) * bottom + ty * top);
    return est;
  }
  const auto kc = kappa.at(node);
  if (!kc) throw DegenerateGradient("no curvature available around node " + node_str(node));
  est.fallback = true;
  est.hk = g.h() * *kc;
  return est;
}

Stencil9 stencil_extract(const LevelSetField& field, Node n) {
  if (!field.grid().is_interior(n)) throw std::out_of_range("stencil_extract: node " + node_str(n) + " lacks a 3x3 neighbourhood");
  Stencil9 s;
  s.h = field.grid().h();
  int k = 0;
  for (int dj = 1; dj >= -1; --dj)
    for (int di = -1; di <= 1; ++di) s.values[k++] = field(n.i + di, n.j + dj);
  return s;
}

}  // namespace hcurv
