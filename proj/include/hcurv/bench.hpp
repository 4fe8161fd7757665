#pragma once

// Evaluation harness: error statistics, polar-rose experiments, resolution
// convergence tables and the small-circle relative-norm study.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hcurv/hybrid.hpp"
#include "hcurv/interfaces.hpp"

namespace hcurv {

struct ErrorStats {
  double mae = 0.0;
  double max_ae = 0.0;
  double mse = 0.0;
  std::size_t n = 0;
};

/// Throws std::invalid_argument on empty or mismatched inputs.
ErrorStats error_stats(const std::vector<double>& predictions, const std::vector<double>& truths);

struct RelativeNorms {
  double l2 = 0.0;
  double linf = 0.0;
};

/// Throws std::invalid_argument when kappa_star == 0 or the input is empty.
RelativeNorms relative_norms(const std::vector<double>& predictions, double kappa_star);

/// Solver names used in CSV output.
inline constexpr const char* kHybrid = "hybrid";
inline constexpr const char* kNumerical10 = "numerical10";
inline constexpr const char* kNumerical20 = "numerical20";

struct RoseNode {
  Node node;
  Point foot;  // analytic closest point
  double kappa_true = 0.0;
  std::map<std::string, double> kappa_est;
  std::map<std::string, Route> route;
};

struct RoseResult {
  double h = 0.0;
  std::vector<RoseNode> nodes;
  std::vector<std::string> solvers;  // in output order
  std::map<std::string, ErrorStats> stats;
  std::size_t dropped = 0;
  double neural_fraction = 0.0;  // hybrid only
};

/// Evaluates the hybrid solver (if given) and G_h on the 10- and
/// 20-iteration reinitialized rose fields at the interface nodes of the
/// 10-iteration field, against the analytic closest-point curvature.
RoseResult run_rose_experiment(const RoseInterface& iface, int nu, const HybridSolver* hybrid);

struct ConvergenceRow {
  int nu = 0;
  std::string solver;
  double mae = 0.0;
  std::optional<double> order_mae;
  double max_ae = 0.0;
  std::optional<double> order_maxae;
};

/// One rose experiment per nu; hybrid[nu] is used when present.
std::vector<ConvergenceRow> run_convergence_study(const RoseInterface& iface, const std::vector<int>& nus,
                                                  const std::map<int, const HybridSolver*>& hybrid);

/// kappa_flat scaled for resolution nu: 2^(nu - 7) * base.
double kappa_flat_for(int nu, double base = 5.0);

struct CircleStudyRow {
  int nu = 0;
  std::string solver;
  double r_over_h = 0.0;
  RelativeNorms norms;
  std::size_t n = 0;
  double neural_fraction = 0.0;
};

struct CircleStudyConfig {
  double radius = 2.0 / 128.0;
  std::vector<int> nus{7};
  int n_centers = 100;
  std::uint64_t seed = 0;
  bool exact_sdf = false;  // validation mode: no reinitialization
};

/// Pools interface-node estimates over random circle centers per nu. Always
/// reports the numerical solver; hybrid rows appear for nus present in the map.
std::vector<CircleStudyRow> run_circle_study(const CircleStudyConfig& cfg,
                                             const std::map<int, const HybridSolver*>& hybrid);

void write_stats_csv(std::ostream& out, const RoseResult& r);
void write_nodes_csv(std::ostream& out, const RoseResult& r, const std::string& solver);
void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows);
/// Rows of one solver.
void write_circle_csv(std::ostream& out, const std::vector<CircleStudyRow>& rows, const std::string& solver);

}  // namespace hcurv
