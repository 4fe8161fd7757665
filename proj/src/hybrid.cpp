#include "hcurv/hybrid.hpp"

#include <cmath>
#include <stdexcept>

#include "hcurv/errors.hpp"

namespace hcurv {

const char* to_string(Route r) { return r == Route::neural ? "neural" : "numerical"; }

HybridSolver::HybridSolver(MlpModel model, PcaParams pca, double kappa_flat, double h)
    : model_(std::move(model)), pca_(std::move(pca)), kappa_flat_(kappa_flat), h_(h) {
  if (!(kappa_flat > 0.0)) throw std::invalid_argument("HybridSolver: kappa_flat must be positive");
  if (!(h > 0.0)) throw std::invalid_argument("HybridSolver: h must be positive");
  if (model_.h != h) throw std::invalid_argument("HybridSolver: model was trained for a different h");
  if (pca_.h != 0.0 && pca_.h != h) throw std::invalid_argument("HybridSolver: preprocessor was fitted for a different h");
  if (model_.preprocessor != pca_.kind)
    throw std::invalid_argument("HybridSolver: model expects a different preprocessor kind");
  model_.validate();
}

double HybridSolver::neural_estimate(const Stencil9& stencil, double hk_num) const {
  const bool flip = hk_num > 0.0;
  Feature9 phi = stencil.values;
  if (flip)
    for (double& v : phi) v = -v;
  const double out = forward(model_, transform(pca_, phi));
  return flip ? -out : out;
}

HybridEstimate HybridSolver::estimate(const LevelSetField& field, Node node) const {
  return estimate(field, numerical_curvature_field(field), node);
}

HybridEstimate HybridSolver::estimate(const LevelSetField& field, const CurvatureField& kappa, Node node) const {
  if (field.grid().h() != h_) throw std::invalid_argument("HybridSolver: field spacing differs from solver h");
  const double hk_num = compound_numerical(field, kappa, node).hk;
  if (std::abs(hk_num) < h_ * kappa_flat_) return {hk_num, Route::numerical};
  return {neural_estimate(stencil_extract(field, node), hk_num), Route::neural};
}

BatchEstimate HybridSolver::estimate_batch(const LevelSetField& field) const {
  const CurvatureField kappa = numerical_curvature_field(field);
  BatchEstimate out;
  std::size_t neural = 0;
  for (const Node n : interface_nodes(field)) {
    try {
      const HybridEstimate e = estimate(field, kappa, n);
      out.entries.push_back({n, e.hk, e.route});
      if (e.route == Route::neural) ++neural;
    } catch (const std::exception& ex) {
      out.errors.push_back({n, ex.what()});
    }
  }
  if (!out.entries.empty()) out.neural_fraction = static_cast<double>(neural) / static_cast<double>(out.entries.size());
  return out;
}

}  // namespace hcurv
