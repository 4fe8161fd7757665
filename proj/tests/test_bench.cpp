#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hcurv/bench.hpp"

using namespace hcurv;

namespace {

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

HybridSolver toy_solver(double h) {
  MlpModel m = glorot_init({{4, 4, 4, 4}, false}, 1);
  m.h = h;
  PcaParams p = PcaParams::identity();
  p.h = h;
  return HybridSolver(m, p, 5.0, h);
}

}  // namespace

TEST_CASE("error statistics") {
  const ErrorStats zero = error_stats({1.0, 2.0}, {1.0, 2.0});
  CHECK(zero.mae == 0.0);
  CHECK(zero.max_ae == 0.0);
  CHECK(zero.mse == 0.0);
  const ErrorStats unit = error_stats({1.0, -1.0}, {0.0, 0.0});
  CHECK(unit.mae == 1.0);
  CHECK(unit.max_ae == 1.0);
  CHECK(unit.mse == 1.0);
  const ErrorStats three = error_stats({3.0, 5.0, -2.0}, {0.0, 5.0, -2.0});
  CHECK(three.mae == 1.0);
  CHECK(three.max_ae == 3.0);
  CHECK(three.mse == 3.0);
  CHECK(three.n == 3);
  CHECK_THROWS_AS(error_stats({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(error_stats({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("relative norms") {
  const RelativeNorms exact = relative_norms({4.0, 4.0}, 4.0);
  CHECK(exact.l2 == 0.0);
  CHECK(exact.linf == 0.0);
  const RelativeNorms twice = relative_norms({8.0}, 4.0);
  CHECK(twice.l2 == 1.0);
  CHECK(twice.linf == 1.0);
  const RelativeNorms tenth = relative_norms({4.4, 3.6, 4.4, 3.6}, 4.0);
  CHECK(tenth.l2 == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(tenth.linf == doctest::Approx(0.1).epsilon(1e-12));
  CHECK_THROWS_AS(relative_norms({1.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(relative_norms({}, 1.0), std::invalid_argument);
}

TEST_CASE("rose experiments") {
  SUBCASE("a circle has constant truth") {
    const RoseResult r = run_rose_experiment({0.0, 0.25, 5}, 7, nullptr);
    CHECK(r.dropped == 0);
    for (const auto& n : r.nodes) CHECK(n.kappa_true == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(r.solvers == std::vector<std::string>{kNumerical10, kNumerical20});
    CHECK(r.stats.at(kNumerical10).mae < 0.05);
  }
  SUBCASE("interface node counts") {
    const HybridSolver s = toy_solver(0x1.0p-7);
    const RoseResult g1 = run_rose_experiment({0.075, 0.35, 5}, 7, &s);
    const RoseResult g2 = run_rose_experiment({0.12, 0.305, 5}, 7, &s);
    CHECK(std::abs(static_cast<double>(g1.nodes.size()) - 632.0) <= 0.05 * 632.0);
    CHECK(std::abs(static_cast<double>(g2.nodes.size()) - 740.0) <= 0.05 * 740.0);
    CHECK(g2.solvers.front() == kHybrid);
    CHECK(g2.neural_fraction > 0.0);
    CHECK(g2.neural_fraction < 1.0);
    for (const RoseResult* r : {&g1, &g2})
      for (const auto& [name, st] : r->stats) {
        CHECK(st.mae <= st.max_ae);
        CHECK(st.mse >= st.mae * st.mae);
        CHECK(st.n == r->nodes.size());
      }
  }
}

TEST_CASE("convergence study") {
  const RoseInterface g2{0.12, 0.305, 5};
  const auto rows = run_convergence_study(g2, {7, 8, 9, 10}, {});
  REQUIRE(rows.size() == 8);
  for (const auto& r : rows) {
    if (r.nu == 7) {
      CHECK_FALSE(r.order_mae.has_value());
      CHECK_FALSE(r.order_maxae.has_value());
    } else {
      REQUIRE(r.order_mae.has_value());
      const auto prev = std::find_if(rows.begin(), rows.end(),
                                     [&](const ConvergenceRow& p) { return p.nu == r.nu - 1 && p.solver == r.solver; });
      REQUIRE(prev != rows.end());
      CHECK(*r.order_mae == std::log2(prev->mae / r.mae));
      CHECK(*r.order_maxae == std::log2(prev->max_ae / r.max_ae));
      if (r.solver == kNumerical20) CHECK(*r.order_mae > 0.0);
    }
  }
  std::stringstream ss;
  write_convergence_csv(ss, rows);
  CHECK(first_line(ss.str()) == "nu,solver,mae,order_mae,max_ae,order_maxae");
  CHECK(ss.str().find("\n7,numerical10,") != std::string::npos);
  CHECK(kappa_flat_for(7) == 5.0);
  CHECK(kappa_flat_for(10) == 40.0);
}

TEST_CASE("circle study") {
  SUBCASE("exact distance validation mode") {
    CircleStudyConfig cfg;
    cfg.radius = 8.0 / 128.0;
    cfg.exact_sdf = true;
    cfg.n_centers = 20;
    cfg.seed = 3;
    const auto rows = run_circle_study(cfg, {});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].solver == kNumerical10);
    CHECK(rows[0].r_over_h == 8.0);
    CHECK(rows[0].norms.linf <= 0.05);
  }
  SUBCASE("small radius routes everything to the network") {
    const HybridSolver s = toy_solver(0x1.0p-7);
    CircleStudyConfig cfg;
    cfg.n_centers = 1;
    cfg.seed = 9;
    const auto a = run_circle_study(cfg, {{7, &s}});
    const auto b = run_circle_study(cfg, {{7, &s}});
    REQUIRE(a.size() == 2);
    CHECK(a[1].solver == kHybrid);
    CHECK(a[1].neural_fraction == 1.0);
    CHECK(a[0].norms.l2 == b[0].norms.l2);
    CHECK(a[1].norms.linf == b[1].norms.linf);
    std::stringstream ss;
    write_circle_csv(ss, a, kHybrid);
    CHECK(first_line(ss.str()) == "nu,R_over_h,l2_rel,linf_rel");
    CHECK(ss.str().find("\n7,2,") != std::string::npos);
  }
  CircleStudyConfig bad;
  bad.radius = 0.0;
  CHECK_THROWS_AS(run_circle_study(bad, {}), std::invalid_argument);
}

TEST_CASE("csv output") {
  const HybridSolver s = toy_solver(0x1.0p-7);
  const RoseResult r = run_rose_experiment({0.075, 0.35, 5}, 7, &s);
  std::stringstream stats;
  write_stats_csv(stats, r);
  CHECK(first_line(stats.str()) == "solver,mae,max_ae,mse,n");
  std::stringstream nodes;
  write_nodes_csv(nodes, r, kHybrid);
  const std::string text = nodes.str();
  CHECK(first_line(text) == "i,j,x_perp,y_perp,kappa_true,kappa_est,route");
  CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) == r.nodes.size() + 1);
  std::stringstream again;
  write_nodes_csv(again, run_rose_experiment({0.075, 0.35, 5}, 7, &s), kHybrid);
  CHECK(again.str() == text);
}
