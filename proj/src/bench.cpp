#include "hcurv/bench.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "hcurv/random.hpp"
#include "hcurv/text_io.hpp"

namespace hcurv {

namespace {

constexpr int kTrainingReinit = 10;
constexpr int kLongReinit = 20;

std::string fmt(double v) { return textio::format_double(v); }

}  // namespace

ErrorStats error_stats(const std::vector<double>& pred, const std::vector<double>& truth) {
  if (pred.empty() || pred.size() != truth.size()) throw std::invalid_argument("error_stats: empty or mismatched inputs");
  ErrorStats s;
  s.n = pred.size();
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double d = std::abs(pred[k] - truth[k]);
    s.mae += d;
    s.mse += d * d;
    s.max_ae = std::max(s.max_ae, d);
  }
  s.mae /= static_cast<double>(s.n);
  s.mse /= static_cast<double>(s.n);
  return s;
}

RelativeNorms relative_norms(const std::vector<double>& pred, double kappa_star) {
  if (kappa_star == 0.0) throw std::invalid_argument("relative_norms: reference curvature is zero");
  if (pred.empty()) throw std::invalid_argument("relative_norms: no samples");
  RelativeNorms r;
  double sum = 0.0;
  for (double p : pred) {
    const double e = (p - kappa_star) / kappa_star;
    sum += e * e;
    r.linf = std::max(r.linf, std::abs(e));
  }
  r.l2 = std::sqrt(sum / static_cast<double>(pred.size()));
  return r;
}

double kappa_flat_for(int nu, double base) { return std::ldexp(base, nu - 7); }

RoseResult run_rose_experiment(const RoseInterface& iface, int nu, const HybridSolver* hybrid) {
  RoseResult res;
  res.h = std::ldexp(1.0, -nu);
  const Grid grid = Grid::square(-0.5, 0.5, res.h);
  const auto phi0 = LevelSetField::sample(grid, [&](Point p) { return rose_level_set(p, iface); });
  const LevelSetField phi10 = reinitialize(phi0, kTrainingReinit);
  const LevelSetField phi20 = reinitialize(phi0, kLongReinit);
  const CurvatureField k10 = numerical_curvature_field(phi10);
  const CurvatureField k20 = numerical_curvature_field(phi20);

  if (hybrid) res.solvers.push_back(kHybrid);
  res.solvers.push_back(kNumerical10);
  res.solvers.push_back(kNumerical20);

  std::size_t neural = 0;
  for (const Node n : interface_nodes(phi10)) {
    RoseNode rn;
    rn.node = n;
    try {
      const ClosestPointResult cp = rose_closest_point(grid.point(n), iface);
      rn.foot = cp.point;
      rn.kappa_true = cp.kappa;
      if (hybrid) {
        const HybridEstimate e = hybrid->estimate(phi10, k10, n);
        rn.kappa_est[kHybrid] = e.hk / res.h;
        rn.route[kHybrid] = e.route;
      }
      rn.kappa_est[kNumerical10] = compound_numerical(phi10, k10, n).hk / res.h;
      rn.route[kNumerical10] = Route::numerical;
      rn.kappa_est[kNumerical20] = compound_numerical(phi20, k20, n).hk / res.h;
      rn.route[kNumerical20] = Route::numerical;
    } catch (const std::exception&) {
      ++res.dropped;
      continue;
    }
    if (hybrid && rn.route[kHybrid] == Route::neural) ++neural;
    res.nodes.push_back(std::move(rn));
  }
  if (res.nodes.empty()) throw std::runtime_error("rose experiment produced no usable interface nodes");
  if (hybrid) res.neural_fraction = static_cast<double>(neural) / static_cast<double>(res.nodes.size());

  std::vector<double> truth;
  for (const auto& rn : res.nodes) truth.push_back(rn.kappa_true);
  for (const auto& s : res.solvers) {
    std::vector<double> est;
    for (const auto& rn : res.nodes) est.push_back(rn.kappa_est.at(s));
    res.stats[s] = error_stats(est, truth);
  }
  return res;
}

std::vector<ConvergenceRow> run_convergence_study(const RoseInterface& iface, const std::vector<int>& nus,
                                                  const std::map<int, const HybridSolver*>& hybrid) {
  std::vector<ConvergenceRow> rows;
  std::map<std::string, ConvergenceRow> prev;
  for (int nu : nus) {
    const auto it = hybrid.find(nu);
    const RoseResult r = run_rose_experiment(iface, nu, it == hybrid.end() ? nullptr : it->second);
    for (const auto& s : r.solvers) {
      ConvergenceRow row;
      row.nu = nu;
      row.solver = s;
      row.mae = r.stats.at(s).mae;
      row.max_ae = r.stats.at(s).max_ae;
      if (const auto p = prev.find(s); p != prev.end()) {
        row.order_mae = std::log2(p->second.mae / row.mae);
        row.order_maxae = std::log2(p->second.max_ae / row.max_ae);
      }
      prev[s] = row;
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<CircleStudyRow> run_circle_study(const CircleStudyConfig& cfg,
                                             const std::map<int, const HybridSolver*>& hybrid) {
  if (!(cfg.radius > 0.0) || cfg.n_centers < 1) throw std::invalid_argument("run_circle_study: invalid configuration");
  std::vector<CircleStudyRow> rows;
  for (int nu : cfg.nus) {
    const double h = std::ldexp(1.0, -nu);
    const auto it = hybrid.find(nu);
    const HybridSolver* hyb = it == hybrid.end() ? nullptr : it->second;
    const Grid grid = Grid::centered(cfg.radius + 8.0 * h, h);
    auto rng = make_stream(cfg.seed, static_cast<std::uint64_t>(nu));

    std::vector<double> num;
    std::vector<double> net;
    std::size_t neural = 0;
    for (int c = 0; c < cfg.n_centers; ++c) {
      const CircleInterface circ{{uniform(rng, -0.5 * h, 0.5 * h), uniform(rng, -0.5 * h, 0.5 * h)}, cfg.radius};
      const LevelSetField field =
          cfg.exact_sdf ? LevelSetField::sample(grid, [&](Point p) { return circle_level_set(p, circ, true); })
                        : reinitialize(LevelSetField::sample(grid, [&](Point p) { return circle_level_set(p, circ, false); }),
                                       kTrainingReinit);
      const CurvatureField kappa = numerical_curvature_field(field);
      for (const Node n : interface_nodes(field)) {
        double hk_num = 0.0;
        HybridEstimate e;
        try {
          hk_num = compound_numerical(field, kappa, n).hk;
          if (hyb) e = hyb->estimate(field, kappa, n);
        } catch (const std::exception&) {
          continue;
        }
        num.push_back(hk_num / h);
        if (hyb) {
          net.push_back(e.hk / h);
          if (e.route == Route::neural) ++neural;
        }
      }
    }
    const double kstar = 1.0 / cfg.radius;
    rows.push_back({nu, kNumerical10, cfg.radius / h, relative_norms(num, kstar), num.size(), 0.0});
    if (hyb)
      rows.push_back({nu, kHybrid, cfg.radius / h, relative_norms(net, kstar), net.size(),
                      static_cast<double>(neural) / static_cast<double>(net.size())});
  }
  return rows;
}

void write_stats_csv(std::ostream& out, const RoseResult& r) {
  out << "solver,mae,max_ae,mse,n\n";
  for (const auto& s : r.solvers) {
    const ErrorStats& e = r.stats.at(s);
    out << s << ',' << fmt(e.mae) << ',' << fmt(e.max_ae) << ',' << fmt(e.mse) << ',' << e.n << '\n';
  }
}

void write_nodes_csv(std::ostream& out, const RoseResult& r, const std::string& solver) {
  out << "i,j,x_perp,y_perp,kappa_true,kappa_est,route\n";
  for (const auto& n : r.nodes)
    out << n.node.i << ',' << n.node.j << ',' << fmt(n.foot.x) << ',' << fmt(n.foot.y) << ',' << fmt(n.kappa_true)
        << ',' << fmt(n.kappa_est.at(solver)) << ',' << to_string(n.route.at(solver)) << '\n';
}

void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
  out << "nu,solver,mae,order_mae,max_ae,order_maxae\n";
  for (const auto& r : rows)
    out << r.nu << ',' << r.solver << ',' << fmt(r.mae) << ',' << (r.order_mae ? fmt(*r.order_mae) : "") << ','
        << fmt(r.max_ae) << ',' << (r.order_maxae ? fmt(*r.order_maxae) : "") << '\n';
}

void write_circle_csv(std::ostream& out, const std::vector<CircleStudyRow>& rows, const std::string& solver) {
  out << "nu,R_over_h,l2_rel,linf_rel\n";
  for (const auto& r : rows)
    if (r.solver == solver)
      out << r.nu << ',' << fmt(r.r_over_h) << ',' << fmt(r.norms.l2) << ',' << fmt(r.norms.linf) << '\n';
}

}  // namespace hcurv
