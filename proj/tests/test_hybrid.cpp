#include <doctest.h>

#include <cmath>
#include <random>

#include "hcurv/hybrid.hpp"
#include "hcurv/interfaces.hpp"

using namespace hcurv;

namespace {

constexpr double kH = 0x1.0p-7;

MlpModel small_model(double h = kH) {
  MlpModel m = glorot_init({{8, 8, 8, 8}, false}, 3);
  for (int l = 0; l < 5; ++l) m.b[l].setConstant(0.05);
  m.h = h;
  return m;
}

PcaParams pca_for(double h = kH) {
  PcaParams p = PcaParams::identity();
  p.h = h;
  // A non-trivial preprocessor so the sign flip has to survive an affine map.
  for (std::size_t k = 0; k < 9; ++k) {
    p.mu[k] = 0.001 * static_cast<double>(k);
    p.sigma[k] = 0.01 + 0.001 * static_cast<double>(k);
  }
  return p;
}

LevelSetField rose_field(double a, double b) {
  const Grid g = Grid::square(-0.5, 0.5, kH);
  const RoseInterface r{a, b, 5};
  return reinitialize(LevelSetField::sample(g, [&](Point p) { return rose_level_set(p, r); }), 10);
}

LevelSetField circle_field(Point c, double r, bool sdf, int iterations) {
  const Grid g = Grid::centered(r + 8 * kH, kH);
  const CircleInterface ci{c, r};
  return reinitialize(LevelSetField::sample(g, [&](Point p) { return circle_level_set(p, ci, sdf); }), iterations);
}

}  // namespace

TEST_CASE("constructor validation") {
  CHECK_NOTHROW(HybridSolver(small_model(), pca_for(), 5.0, kH));
  PcaParams unknown_h = pca_for();
  unknown_h.h = 0.0;
  CHECK_NOTHROW(HybridSolver(small_model(), unknown_h, 5.0, kH));
  CHECK_THROWS_AS(HybridSolver(small_model(), pca_for(), 0.0, kH), std::invalid_argument);
  CHECK_THROWS_AS(HybridSolver(small_model(), pca_for(), 5.0, kH / 2), std::invalid_argument);
  CHECK_THROWS_AS(HybridSolver(small_model(), pca_for(kH / 2), 5.0, kH), std::invalid_argument);
  PcaParams std_kind = pca_for();
  std_kind.kind = PreprocessorKind::std;
  CHECK_THROWS_AS(HybridSolver(small_model(), std_kind, 5.0, kH), std::invalid_argument);

  const HybridSolver s(small_model(), pca_for(), 5.0, kH);
  const LevelSetField other = circle_field({0, 0}, 0.1, true, 0);
  const Grid fine = Grid::square(-0.5, 0.5, kH / 2);
  const auto fine_field = LevelSetField::sample(fine, [](Point p) { return p.y; });
  CHECK_THROWS_AS(s.estimate(fine_field, {10, 128}), std::invalid_argument);
  CHECK(s.estimate_batch(other).entries.size() > 0);
}

TEST_CASE("flat interface stays numerical") {
  const HybridSolver s(small_model(), pca_for(), 5.0, kH);
  const Grid g = Grid::square(-0.5, 0.5, kH);
  const auto flat = LevelSetField::sample(g, [](Point p) { return p.y - 0.3 * kH; });
  const BatchEstimate b = s.estimate_batch(flat);
  REQUIRE(!b.entries.empty());
  CHECK(b.neural_fraction == 0.0);
  for (const auto& e : b.entries) {
    CHECK(e.route == Route::numerical);
    CHECK(e.hk == 0.0);
  }
}

TEST_CASE("neural route flips positive stencils") {
  const HybridSolver s(small_model(), pca_for(), 5.0, kH);
  const LevelSetField f = circle_field({0.001, -0.002}, 1.0 / 64, true, 0);
  const CurvatureField k = numerical_curvature_field(f);
  int checked = 0;
  for (const Node n : interface_nodes(f)) {
    const HybridEstimate e = s.estimate(f, k, n);
    const double hk_num = compound_numerical(f, k, n).hk;
    REQUIRE(e.route == Route::neural);
    REQUIRE(hk_num > 0.0);
    Feature9 phi = stencil_extract(f, n).values;
    for (double& v : phi) v = -v;
    CHECK(e.hk == -forward(s.model(), transform(s.pca(), phi)));
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("negation symmetry on both routes") {
  const HybridSolver s(small_model(), pca_for(), 5.0, kH);
  const LevelSetField rose = rose_field(0.12, 0.305);
  const BatchEstimate pos = s.estimate_batch(rose);
  const BatchEstimate neg = s.estimate_batch(rose.negated());
  REQUIRE(pos.entries.size() == neg.entries.size());
  bool saw[2] = {false, false};
  for (std::size_t k = 0; k < pos.entries.size(); ++k) {
    CHECK(neg.entries[k].hk == -pos.entries[k].hk);
    CHECK(neg.entries[k].route == pos.entries[k].route);
    saw[pos.entries[k].route == Route::neural] = true;
  }
  CHECK(saw[0]);
  CHECK(saw[1]);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.5 * kH, 0.5 * kH);
  std::uniform_real_distribution<double> ur(2 * kH, 0.2);
  for (int c = 0; c < 25; ++c) {
    const LevelSetField f = circle_field({u(rng), u(rng)}, ur(rng), c % 2 == 0, 10);
    const CurvatureField kf = numerical_curvature_field(f);
    const LevelSetField g = f.negated();
    const CurvatureField kg = numerical_curvature_field(g);
    for (const Node n : interface_nodes(f)) CHECK(s.estimate(g, kg, n).hk == -s.estimate(f, kf, n).hk);
  }
}

TEST_CASE("routing by circle size") {
  const HybridSolver s(small_model(), pca_for(), 5.0, kH);
  const BatchEstimate small = s.estimate_batch(circle_field({0, 0}, 1.0 / 64, true, 0));
  CHECK(small.errors.empty());
  CHECK(small.neural_fraction == 1.0);
  const BatchEstimate large = s.estimate_batch(circle_field({0, 0}, 1.0, true, 0));
  CHECK(large.errors.empty());
  CHECK(large.neural_fraction == 0.0);
  for (std::size_t k = 1; k < large.entries.size(); ++k)
    CHECK(large.entries[k - 1].node.j * 10000 + large.entries[k - 1].node.i <
          large.entries[k].node.j * 10000 + large.entries[k].node.i);
}

TEST_CASE("threshold limits and the tie rule") {
  const LevelSetField rose = rose_field(0.12, 0.305);
  const CurvatureField k = numerical_curvature_field(rose);
  const HybridSolver huge(small_model(), pca_for(), 1e9, kH);
  const HybridSolver tiny(small_model(), pca_for(), 1e-9, kH);
  for (const Node n : interface_nodes(rose)) {
    const HybridEstimate a = huge.estimate(rose, k, n);
    CHECK(a.route == Route::numerical);
    CHECK(a.hk == compound_numerical(rose, k, n).hk);
    CHECK(tiny.estimate(rose, k, n).route == Route::neural);
  }

  const Node n = interface_nodes(rose).front();
  const double hk = compound_numerical(rose, k, n).hk;
  const HybridSolver tie(small_model(), pca_for(), std::abs(hk) / kH, kH);
  CHECK(tie.estimate(rose, k, n).route == Route::neural);
  CHECK(to_string(Route::neural) == std::string("neural"));
}
