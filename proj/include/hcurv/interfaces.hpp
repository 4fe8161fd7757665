#pragma once

// Analytic interface families used for training data and benchmarks: tilted
// and translated sine waves, circles and polar roses. Each provides level-set
// evaluation, a closest-point search and the exact signed curvature.

#include <vector>

#include "hcurv/grid_levelset.hpp"

namespace hcurv {

/// Root-finding controls shared by the closest-point searches.
inline constexpr double kParameterTolerance = 1e-10;
inline constexpr int kMaxRootIterations = 100;

struct ClosestPointResult {
  double parameter = 0.0;  // t* for sines, theta* for roses
  Point point;             // foot point in global coordinates
  double distance = 0.0;
  double kappa = 0.0;      // signed curvature at the foot point
};

/// Maps a global point into the frame rotated by theta and translated by t.
Point global_to_local(Point p, double theta, Point translation);
Point local_to_global(Point p, double theta, Point translation);

/// -A w^2 sin(w t) / (1 + A^2 w^2 cos^2(w t))^{3/2}
double sine_curvature(double t, double amplitude, double frequency);

/// y = A sin(w t) in a local frame; the global frame sees it rotated by `tilt`
/// and shifted by `translation`. Carries a polyline discretization of the
/// canonical curve over t in [-half_extent, half_extent].
class SineInterface {
 public:
  SineInterface(double amplitude, double frequency, double tilt, Point translation, double dt,
                double half_extent = 1.75);

  double amplitude() const { return amplitude_; }
  double frequency() const { return frequency_; }
  double tilt() const { return tilt_; }
  Point translation() const { return translation_; }
  double dt() const { return dt_; }
  double t_begin() const { return t0_; }
  const std::vector<double>& polyline_y() const { return poly_y_; }

  double f(double t) const;

  struct SegmentHit {
    double distance = 0.0;
    std::size_t segment = 0;  // polyline points [segment, segment + 1]
  };
  /// Nearest polyline segment to a point given in local coordinates.
  SegmentHit nearest_segment(Point local) const;
  /// Polyline height at local abscissa x (linear interpolation).
  double polyline_height(double x) const;

 private:
  double amplitude_;
  double frequency_;
  double tilt_;
  Point translation_;
  double dt_;
  double t0_;
  std::vector<double> poly_y_;
};

/// Bracketed bisection + Newton on the stationarity condition. Throws
/// ConvergenceError if the parameter does not settle to 1e-10 in 100 steps.
ClosestPointResult sine_closest_point(Point p_global, const SineInterface& iface);

/// With signed_distance: exact distance, negative above the wave (local
/// frame). Without: distance and side taken from the polyline only.
double sine_level_set(Point p_global, const SineInterface& iface, bool signed_distance);

struct CircleInterface {
  Point center;
  double radius = 0.0;
};

/// |p - c| - r (signed distance) or |p - c|^2 - r^2.
double circle_level_set(Point p, const CircleInterface& iface, bool signed_distance);

/// r(theta) = a cos(p theta) + b.
struct RoseInterface {
  double a = 0.0;
  double b = 0.0;
  int petals = 1;

  double radius(double theta) const;
  double radius_d1(double theta) const;
  double radius_d2(double theta) const;
};

double rose_curvature(double theta, const RoseInterface& iface);
/// Requires p != origin. Throws ConvergenceError on failure.
ClosestPointResult rose_closest_point(Point p, const RoseInterface& iface);
/// sqrt(x^2 + y^2) - a cos(p theta) - b with theta = atan2(y, x) in [0, 2 pi).
double rose_level_set(Point p, const RoseInterface& iface);

}  // namespace hcurv
