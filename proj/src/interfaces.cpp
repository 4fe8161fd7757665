#include "hcurv/interfaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "hcurv/errors.hpp"

namespace hcurv {

namespace {

constexpr int kInitialBisections = 4;
constexpr int kMaxBracketExpansions = 64;

// Root of g in [lo, hi] with g(lo) <= 0 <= g(hi): a few bisections, then
// Newton steps that fall back to bisection whenever they leave the bracket.
template <typename Fn, typename DFn>
double safeguarded_root(Fn&& g, DFn&& dg, double lo, double hi, const char* what) {
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < kMaxRootIterations; ++it) {
    const double gx = g(x);
    if (gx == 0.0) return x;
    if (gx < 0.0)
      lo = x;
    else
      hi = x;

    double next = 0.5 * (lo + hi);
    if (it >= kInitialBisections) {
      const double slope = dg(x);
      if (slope > 0.0) {
        const double newton = x - gx / slope;
        if (newton > lo && newton < hi) next = newton;
      }
    }
    const double step = std::abs(next - x);
    x = next;
    if (step <= kParameterTolerance || hi - lo <= kParameterTolerance) {
      // One last Newton step sharpens a bisection-terminated root.
      const double slope = dg(x);
      if (slope > 0.0) {
        const double polished = x - g(x) / slope;
        if (polished >= lo && polished <= hi) return polished;
      }
      return x;
    }
  }
  throw ConvergenceError(std::string(what) + ": no convergence in " + std::to_string(kMaxRootIterations) + " iterations",
                         lo, hi);
}

// Widens [lo, hi] in steps of `step` until g(lo) <= 0 <= g(hi).
template <typename Fn>
void widen_bracket(Fn&& g, double& lo, double& hi, double step, const char* what) {
  int n = 0;
  while (g(lo) > 0.0) {
    if (++n > kMaxBracketExpansions) throw ConvergenceError(std::string(what) + ": cannot bracket minimum", lo, hi);
    lo -= step;
  }
  n = 0;
  while (g(hi) < 0.0) {
    if (++n > kMaxBracketExpansions) throw ConvergenceError(std::string(what) + ": cannot bracket minimum", lo, hi);
    hi += step;
  }
}

double point_segment_distance(Point p, Point a, Point b) {
  const double ex = b.x - a.x;
  const double ey = b.y - a.y;
  const double len2 = ex * ex + ey * ey;
  double s = len2 > 0.0 ? ((p.x - a.x) * ex + (p.y - a.y) * ey) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  const double dx = p.x - (a.x + s * ex);
  const double dy = p.y - (a.y + s * ey);
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

Point global_to_local(Point p, double theta, Point t) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c * (p.x - t.x) + s * (p.y - t.y), c * (p.y - t.y) + s * (t.x - p.x)};
}

Point local_to_global(Point p, double theta, Point t) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {t.x + c * p.x - s * p.y, t.y + s * p.x + c * p.y};
}

double sine_curvature(double t, double amplitude, double frequency) {
  const double wt = frequency * t;
  const double slope = amplitude * frequency * std::cos(wt);
  return -amplitude * frequency * frequency * std::sin(wt) / std::pow(1.0 + slope * slope, 1.5);
}

SineInterface::SineInterface(double amplitude, double frequency, double tilt, Point translation, double dt,
                             double half_extent)
    : amplitude_(amplitude), frequency_(frequency), tilt_(tilt), translation_(translation), dt_(dt), t0_(-half_extent) {
  if (!(amplitude > 0.0) || !(frequency > 0.0) || !(dt > 0.0) || !(half_extent > 0.0))
    throw std::invalid_argument("SineInterface: amplitude, frequency, dt and extent must be positive");
  const auto segments = static_cast<std::size_t>(std::ceil(2.0 * half_extent / dt));
  poly_y_.resize(segments + 1);
  for (std::size_t k = 0; k <= segments; ++k) poly_y_[k] = f(t0_ + static_cast<double>(k) * dt_);
}

double SineInterface::f(double t) const { return amplitude_ * std::sin(frequency_ * t); }

SineInterface::SegmentHit SineInterface::nearest_segment(Point p) const {
  const std::size_t segments = poly_y_.size() - 1;
  const double u = (p.x - t0_) / dt_;
  const auto start = static_cast<std::size_t>(std::clamp(std::floor(u), 0.0, static_cast<double>(segments - 1)));
  auto seg_dist = [&](std::size_t k) {
    const double ta = t0_ + static_cast<double>(k) * dt_;
    return point_segment_distance(p, {ta, poly_y_[k]}, {ta + dt_, poly_y_[k + 1]});
  };

  SegmentHit best{seg_dist(start), start};
  // The curve is a graph over t, so |t - x| bounds the distance from below.
  for (std::size_t k = start + 1; k < segments; ++k) {
    const double ta = t0_ + static_cast<double>(k) * dt_;
    if (ta - p.x > best.distance) break;
    const double d = seg_dist(k);
    if (d < best.distance) best = {d, k};
  }
  for (std::size_t k = start; k-- > 0;) {
    const double tb = t0_ + static_cast<double>(k + 1) * dt_;
    if (p.x - tb > best.distance) break;
    const double d = seg_dist(k);
    if (d < best.distance) best = {d, k};
  }
  return best;
}

double SineInterface::polyline_height(double x) const {
  const std::size_t segments = poly_y_.size() - 1;
  const double u = (x - t0_) / dt_;
  const auto k = static_cast<std::size_t>(std::clamp(std::floor(u), 0.0, static_cast<double>(segments - 1)));
  const double s = u - static_cast<double>(k);
  return (1.0 - s) * poly_y_[k] + s * poly_y_[k + 1];
}

ClosestPointResult sine_closest_point(Point p_global, const SineInterface& iface) {
  const Point p = global_to_local(p_global, iface.tilt(), iface.translation());
  const double a = iface.amplitude();
  const double w = iface.frequency();

  // Half gradient of the squared distance with respect to t, and its derivative.
  auto g = [&](double t) {
    const double s = std::sin(w * t);
    const double c = std::cos(w * t);
    return (t - p.x) + (a * s - p.y) * a * w * c;
  };
  auto dg = [&](double t) {
    const double s = std::sin(w * t);
    const double c = std::cos(w * t);
    return 1.0 + a * a * w * w * c * c - (a * s - p.y) * a * w * w * s;
  };

  const auto hit = iface.nearest_segment(p);
  const double dt = iface.dt();
  const double ta = iface.t_begin() + static_cast<double>(hit.segment) * dt;
  double lo = ta - dt;
  double hi = ta + 2.0 * dt;
  widen_bracket(g, lo, hi, dt, "sine_closest_point");
  const double t = safeguarded_root(g, dg, lo, hi, "sine_closest_point");

  const Point foot_local{t, iface.f(t)};
  ClosestPointResult r;
  r.parameter = t;
  r.point = local_to_global(foot_local, iface.tilt(), iface.translation());
  r.distance = std::hypot(p.x - foot_local.x, p.y - foot_local.y);
  r.kappa = sine_curvature(t, a, w);
  return r;
}

double sine_level_set(Point p_global, const SineInterface& iface, bool signed_distance) {
  const Point p = global_to_local(p_global, iface.tilt(), iface.translation());
  if (signed_distance) {
    const double d = sine_closest_point(p_global, iface).distance;
    const double fy = iface.f(p.x);
    if (p.y > fy) return -d;
    if (p.y < fy) return d;
    return 0.0;
  }
  const double d = iface.nearest_segment(p).distance;
  const double fy = iface.polyline_height(p.x);
  if (p.y > fy) return -d;
  if (p.y < fy) return d;
  return 0.0;
}

double circle_level_set(Point p, const CircleInterface& iface, bool signed_distance) {
  const double dx = p.x - iface.center.x;
  const double dy = p.y - iface.center.y;
  if (signed_distance) return std::sqrt(dx * dx + dy * dy) - iface.radius;
  return dx * dx + dy * dy - iface.radius * iface.radius;
}

double RoseInterface::radius(double theta) const { return a * std::cos(petals * theta) + b; }
double RoseInterface::radius_d1(double theta) const { return -a * petals * std::sin(petals * theta); }
double RoseInterface::radius_d2(double theta) const {
  return -a * petals * petals * std::cos(petals * theta);
}

double rose_curvature(double theta, const RoseInterface& iface) {
  const double r = iface.radius(theta);
  const double r1 = iface.radius_d1(theta);
  const double r2 = iface.radius_d2(theta);
  return (r * r + 2.0 * r1 * r1 - r * r2) / std::pow(r * r + r1 * r1, 1.5);
}

ClosestPointResult rose_closest_point(Point p, const RoseInterface& iface) {
  if (p.x == 0.0 && p.y == 0.0) throw std::invalid_argument("rose_closest_point: point at the origin");

  auto curve = [&](double th) {
    const double r = iface.radius(th);
    return Point{r * std::cos(th), r * std::sin(th)};
  };
  // c'(th) and c''(th) of the polar curve.
  auto d1 = [&](double th) {
    const double r = iface.radius(th);
    const double r1 = iface.radius_d1(th);
    const double c = std::cos(th);
    const double s = std::sin(th);
    return Point{r1 * c - r * s, r1 * s + r * c};
  };
  auto d2 = [&](double th) {
    const double r = iface.radius(th);
    const double r1 = iface.radius_d1(th);
    const double r2 = iface.radius_d2(th);
    const double c = std::cos(th);
    const double s = std::sin(th);
    return Point{r2 * c - 2.0 * r1 * s - r * c, r2 * s + 2.0 * r1 * c - r * s};
  };
  auto g = [&](double th) {
    const Point c = curve(th);
    const Point t = d1(th);
    return (c.x - p.x) * t.x + (c.y - p.y) * t.y;
  };
  auto dg = [&](double th) {
    const Point c = curve(th);
    const Point t = d1(th);
    const Point n = d2(th);
    return t.x * t.x + t.y * t.y + (c.x - p.x) * n.x + (c.y - p.y) * n.y;
  };
  auto dist2 = [&](double th) {
    const Point c = curve(th);
    return (c.x - p.x) * (c.x - p.x) + (c.y - p.y) * (c.y - p.y);
  };

  constexpr int kCells = 32;
  const double center = std::atan2(p.y, p.x);
  const double half = std::numbers::pi / iface.petals;
  const double cell = 2.0 * half / kCells;
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kCells; ++k) {
    const double d = dist2(center - half + k * cell);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  double lo = center - half + (best - 1) * cell;
  double hi = center - half + (best + 1) * cell;
  widen_bracket(g, lo, hi, cell, "rose_closest_point");
  const double th = safeguarded_root(g, dg, lo, hi, "rose_closest_point");

  ClosestPointResult r;
  r.parameter = th;
  r.point = curve(th);
  r.distance = std::hypot(p.x - r.point.x, p.y - r.point.y);
  r.kappa = rose_curvature(th, iface);
  return r;
}

double rose_level_set(Point p, const RoseInterface& iface) {
  double theta = 0.0;
  if (p.x != 0.0 || p.y != 0.0) {
    theta = std::atan2(p.y, p.x);
    if (theta < 0.0) theta += 2.0 * std::numbers::pi;
  }
  return std::sqrt(p.x * p.x + p.y * p.y) - iface.a * std::cos(iface.petals * theta) - iface.b;
}

}  // namespace hcurv
