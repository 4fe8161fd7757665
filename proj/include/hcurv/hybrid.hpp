#pragma once

// Switching curvature solver: keeps the numerical estimate for near-flat
// interface nodes and hands the rest, sign-normalized, to the network.

#include <string>
#include <vector>

#include "hcurv/grid_levelset.hpp"
#include "hcurv/neural.hpp"
#include "hcurv/preprocess.hpp"

namespace hcurv {

enum class Route { numerical, neural };

const char* to_string(Route r);

struct HybridEstimate {
  double hk = 0.0;
  Route route = Route::numerical;
};

struct NodeEstimate {
  Node node;
  double hk = 0.0;
  Route route = Route::numerical;
};

struct NodeFailure {
  Node node;
  std::string message;
};

struct BatchEstimate {
  std::vector<NodeEstimate> entries;  // node-index order
  std::vector<NodeFailure> errors;
  double neural_fraction = 0.0;       // over successful entries
};

class HybridSolver {
 public:
  /// Throws std::invalid_argument if kappa_flat <= 0, if the model or the
  /// preprocessor was built for another h, or if their kinds disagree.
  HybridSolver(MlpModel model, PcaParams pca, double kappa_flat, double h);

  double kappa_flat() const { return kappa_flat_; }
  double h() const { return h_; }
  const MlpModel& model() const { return model_; }
  const PcaParams& pca() const { return pca_; }

  HybridEstimate estimate(const LevelSetField& field, Node node) const;
  /// Same, reusing a curvature field computed once for the whole level set.
  HybridEstimate estimate(const LevelSetField& field, const CurvatureField& kappa, Node node) const;
  /// Network path for a stencil whose numerical estimate is hk_num.
  double neural_estimate(const Stencil9& stencil, double hk_num) const;

  /// Every interface node; per-node failures are collected, not thrown.
  BatchEstimate estimate_batch(const LevelSetField& field) const;

 private:
  MlpModel model_;
  PcaParams pca_;
  double kappa_flat_;
  double h_;
};

}  // namespace hcurv
