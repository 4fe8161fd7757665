#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "hcurv/errors.hpp"
#include "hcurv/preprocess.hpp"

using namespace hcurv;

namespace {

using Mat9 = std::array<std::array<double, 9>, 9>;

Mat9 covariance(const std::vector<Feature9>& rows) {
  Feature9 mu{};
  for (const auto& r : rows)
    for (int i = 0; i < 9; ++i) mu[i] += r[i];
  for (double& m : mu) m /= static_cast<double>(rows.size());
  Mat9 c{};
  for (const auto& r : rows)
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 9; ++j) c[i][j] += (r[i] - mu[i]) * (r[j] - mu[j]);
  for (auto& row : c)
    for (double& v : row) v /= static_cast<double>(rows.size() - 1);
  return c;
}

// Cyclic Jacobi rotations; returns eigenvalues and eigenvectors (columns).
void jacobi(Mat9 a, Feature9& eval, Mat9& evec) {
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) evec[i][j] = i == j ? 1.0 : 0.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < 9; ++p)
      for (int q = p + 1; q < 9; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-40) break;
    for (int p = 0; p < 9; ++p) {
      for (int q = p + 1; q < 9; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < 9; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 9; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < 9; ++k) {
          const double vkp = evec[k][p], vkq = evec[k][q];
          evec[k][p] = c * vkp - s * vkq;
          evec[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  for (int i = 0; i < 9; ++i) eval[i] = a[i][i];
}

std::vector<Feature9> gaussian_rows(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Feature9> rows(n);
  for (auto& r : rows)
    for (double& v : r) v = g(rng);
  return rows;
}

// Two correlated features plus seven independent ones of distinct scales.
std::vector<Feature9> toy_rows(std::size_t n) {
  auto rows = gaussian_rows(n, 17);
  for (auto& r : rows) {
    const double a = r[0], b = r[1];
    r[0] = 2.0 * a + 0.5 * b + 1.0;
    r[1] = 0.5 * a + 1.0 * b - 2.0;
    for (int k = 2; k < 9; ++k) r[k] *= 0.01 * (k + 1);
  }
  return rows;
}

}  // namespace

TEST_CASE("pca matches an independent eigensolver") {
  const auto rows = toy_rows(5000);
  const PcaParams p = fit_pca(rows, 0.25);
  CHECK(p.kind == PreprocessorKind::pca);
  CHECK(p.h == 0.25);

  Feature9 eval;
  Mat9 evec;
  jacobi(covariance(rows), eval, evec);
  std::array<int, 9> order{0, 1, 2, 3, 4, 5, 6, 7, 8};
  std::sort(order.begin(), order.end(), [&](int a, int b) { return eval[a] > eval[b]; });
  for (int k = 0; k < 9; ++k) {
    const int src = order[k];
    CHECK(std::abs(p.sigma[k] - std::sqrt(eval[src])) < 1e-8);
    int arg = 0;
    for (int r = 1; r < 9; ++r)
      if (std::abs(evec[r][src]) > std::abs(evec[arg][src])) arg = r;
    const double sign = evec[arg][src] > 0 ? 1.0 : -1.0;
    for (int r = 0; r < 9; ++r) CHECK(std::abs(p.V(r, k) - sign * evec[r][src]) < 1e-8);
  }
  double ortho = 0.0;
  for (int a = 0; a < 9; ++a)
    for (int b = 0; b < 9; ++b) {
      double dot = 0.0;
      for (int r = 0; r < 9; ++r) dot += p.V(r, a) * p.V(r, b);
      ortho = std::max(ortho, std::abs(dot - (a == b ? 1.0 : 0.0)));
    }
  CHECK(ortho <= 1e-10);

  const PcaParams again = fit_pca(rows, 0.25);
  CHECK(again == p);
}

TEST_CASE("whitening on the fitting data") {
  const auto rows = toy_rows(4000);
  const PcaParams p = fit_pca(rows);
  std::vector<Feature9> out;
  for (const auto& r : rows) out.push_back(transform(p, r));
  const Mat9 c = covariance(out);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) CHECK(std::abs(c[i][j] - (i == j ? 1.0 : 0.0)) <= 1e-8);

  CHECK(transform(p, p.mu) == Feature9{});
}

TEST_CASE("identity covariance sample") {
  const PcaParams p = fit_pca(gaussian_rows(100000, 5));
  for (double s : p.sigma) CHECK(std::abs(s - 1.0) < 0.05);
}

TEST_CASE("rank deficiency and small inputs") {
  auto rows = gaussian_rows(50, 2);
  for (auto& r : rows) r[4] = 3.0;
  CHECK_THROWS_AS(fit_pca(rows), RankDeficiency);
  try {
    fit_pca(rows);
  } catch (const RankDeficiency& e) {
    CHECK(e.component == 8);
  }
  CHECK_THROWS_AS(fit_standardize(rows), RankDeficiency);
  CHECK_THROWS_AS(fit_pca(gaussian_rows(9, 1)), std::invalid_argument);
}

TEST_CASE("transform properties") {
  const PcaParams id = PcaParams::identity();
  const Feature9 phi{0.1, -0.2, 0.3, -0.4, 0.5, -0.6, 0.7, -0.8, 0.9};
  CHECK(transform(id, phi) == phi);

  const PcaParams p = fit_pca(toy_rows(1000));
  const Feature9 q{1, 2, -1, 0.5, 0.25, -3, 0, 1, 2};
  for (double alpha : {0.0, 0.3, 0.77, 1.0}) {
    Feature9 mix;
    for (int i = 0; i < 9; ++i) mix[i] = alpha * phi[i] + (1 - alpha) * q[i];
    const Feature9 lhs = transform(p, mix);
    const Feature9 a = transform(p, phi), b = transform(p, q);
    for (int i = 0; i < 9; ++i) CHECK(std::abs(lhs[i] - (alpha * a[i] + (1 - alpha) * b[i])) <= 1e-12 * (1 + std::abs(lhs[i])));
  }

  const PcaParams s = fit_standardize(toy_rows(1000));
  CHECK(s.kind == PreprocessorKind::std);
  CHECK(s.V(3, 3) == 1.0);
  CHECK(s.V(3, 4) == 0.0);
}

TEST_CASE("pca files") {
  const PcaParams p = fit_pca(toy_rows(500), 0x1.0p-7);
  std::stringstream ss;
  write_pca(ss, p);
  CHECK(read_pca(ss) == p);

  const PcaParams s = fit_standardize(toy_rows(500), 0x1.0p-9);
  std::stringstream ss2;
  write_pca(ss2, s);
  CHECK(read_pca(ss2) == s);

  std::stringstream full;
  write_pca(full, p);
  const std::string text = full.str();
  std::stringstream truncated(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(read_pca(truncated, "p.pca"), ParseError);
  std::stringstream wrong("pca 8\n");
  CHECK_THROWS_AS(read_pca(wrong), ParseError);
  CHECK_THROWS_AS(load_pca("/nonexistent/p.pca"), std::exception);
}
