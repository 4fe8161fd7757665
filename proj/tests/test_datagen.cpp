#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "hcurv/datagen.hpp"
#include "hcurv/errors.hpp"
#include "hcurv/random.hpp"

using namespace hcurv;

namespace {

constexpr double kH = 0x1.0p-7;
constexpr double kKmin = 0.5;
constexpr double kKmax = 256.0 / 3.0;

Stencil9 st(std::array<double, 9> v) { return {v, kH}; }

Dataset empty_dataset() {
  Dataset d;
  d.h = kH;
  d.kappa_min = kKmin;
  d.kappa_max = kKmax;
  return d;
}

double bin_center(const Dataset& d, int b, int n_bins) {
  const double lo = -d.h * d.kappa_max;
  const double hi = -d.c * d.h * d.kappa_flat;
  return lo + (b + 0.5) * (hi - lo) / n_bins;
}

// Sample whose stencil encodes its position, so identity survives shuffles.
Sample tagged(double target, int id) {
  Sample s;
  s.stencil = st({static_cast<double>(id), 0, 0, 0, 0, 0, 0, 0, 0});
  s.target = target;
  return s;
}

}  // namespace

TEST_CASE("generation constants") {
  const CircleGenConfig c = CircleGenConfig::make(kH, kKmin, kKmax);
  CHECK(c.n_r() == 511);
  CHECK(c.n_s() == 789);
  CHECK(c.n_s_bar() == 789);
  CHECK(c.kappa(0) == kKmin);
  CHECK(c.kappa(510) == doctest::Approx(kKmax).epsilon(1e-14));
  const CircleGenConfig fine = CircleGenConfig::make(kH / 2, kKmin, kKmax);
  CHECK(fine.n_s_bar() <= fine.n_s());
  CHECK(fine.n_r() == 2 * 511 - 1 + 1);

  const SineGenConfig s = SineGenConfig::make(kH, kKmin, kKmax);
  CHECK(s.l_p() == 1.0);
  CHECK(s.amplitude(0) == doctest::Approx(1.5 * kH));
  CHECK(s.amplitude(32) == doctest::Approx(0.25));
  CHECK(s.tilt(0) == doctest::Approx(-M_PI / 4));
  CHECK(s.tilt(32) < M_PI / 4);
  CHECK(s.mu_max_kappa() == doctest::Approx((kKmax / 4 + kKmax) / 2));
  const double a = 0.1;
  CHECK(s.omega_min(a) == doctest::Approx(std::sqrt(kKmax / (4 * a))));
  CHECK(s.omega_max(a) == doctest::Approx(std::sqrt(kKmax / a)));
  const double crests = M_PI / 2 * (1 / s.omega_min(a) - 1 / s.omega_max(a));
  CHECK(s.n_omega(a) == static_cast<int>(std::ceil(crests / kH)) + 1);
  CHECK(SineGenConfig::make(kH / 8, kKmin, kKmax).l_p() == doctest::Approx(2.0));

  CHECK_THROWS_AS(generate_sine_dataset(2 * kH, kKmin, kKmax, 1, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(generate_circle_dataset(kH, kKmin, kKmax, 1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(generate_circle_dataset(kH, kKmax, kKmin, 1, 0.1), std::invalid_argument);
}

TEST_CASE("acceptance probability and sweep thinning") {
  CHECK(acceptance_probability(0.0, 10.0) == doctest::Approx(0.05));
  CHECK(acceptance_probability(5.0, 10.0) == doctest::Approx(0.05 + 0.95 * 0.25));
  CHECK(acceptance_probability(10.0, 10.0) == 1.0);
  CHECK(acceptance_probability(50.0, 10.0) == 1.0);
  std::size_t kept = 0;
  for (std::size_t k = 0; k < 1000; ++k) kept += keep_sweep_index(k, 0.1) ? 1 : 0;
  CHECK(kept == 100);
  for (std::size_t k = 0; k < 10; ++k) CHECK(keep_sweep_index(k, 1.0));
}

TEST_CASE("negative normalization") {
  const Stencil9 s = st({1, 2, 3, 4, 5, 6, 7, 8, 9});
  auto [neg, k] = negative_normalize(s, 0.3);
  CHECK(k == -0.3);
  for (int i = 0; i < 9; ++i) CHECK(neg.values[i] == -s.values[i]);
  auto [same, k2] = negative_normalize(s, -0.3);
  CHECK(k2 == -0.3);
  CHECK(same.values == s.values);
  auto [again, k3] = negative_normalize(neg, k);
  CHECK(again.values == neg.values);
  CHECK(k3 == k);
  CHECK_THROWS_AS(negative_normalize(s, 0.0), std::invalid_argument);
}

TEST_CASE("quarter-turn rotation") {
  const double h = kH;
  // phi = y becomes phi = -x.
  const Stencil9 y = st({h, h, h, 0, 0, 0, -h, -h, -h});
  const Stencil9 r = rotate_stencil_90(y);
  const std::array<double, 9> want{h, 0, -h, h, 0, -h, h, 0, -h};
  CHECK(r.values == want);
  const Stencil9 s = st({1, 2, 3, 4, 5, 6, 7, 8, 9});
  CHECK(rotate_stencil_90(rotate_stencil_90(rotate_stencil_90(rotate_stencil_90(s)))).values == s.values);
  const Stencil9 c = st({2, 2, 2, 2, 2, 2, 2, 2, 2});
  CHECK(rotate_stencil_90(c).values == c.values);
}

TEST_CASE("a flat sine interface yields nothing") {
  // Crest curvature A w^2 = 0.4 stays below kappa_min.
  const SineGenConfig cfg = SineGenConfig::make(kH, kKmin, kKmax);
  auto rng = make_stream(3, 0);
  GenReport rep;
  CHECK(collect_sine_samples(cfg, 0.1, 2.0, 0.0, rng, &rep).empty());
}

TEST_CASE("sine dataset invariants") {
  GenReport rep;
  const Dataset d = generate_sine_dataset(kH, kKmin, kKmax, 21, 0.002, &rep);
  REQUIRE(!d.samples.empty());
  CHECK(rep.sweeps > 0);
  CHECK(d.samples.size() % 4 == 0);
  std::set<SampleSource> sources;
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    const Sample& s = d.samples[i];
    sources.insert(s.source);
    CHECK(s.target < 0.0);
    CHECK(s.target <= -kH * kKmin);
    CHECK(s.target >= -kH * kKmax - 1e-12);
    CHECK(s.stencil.h == kH);
    CHECK(is_interface_adjacent(s.stencil.values));
    if (i % 4 != 0) {
      const Sample& prev = d.samples[i - 1];
      CHECK(s.stencil.values == rotate_stencil_90(prev.stencil).values);
      CHECK(s.target == prev.target);
      CHECK(s.source == prev.source);
    }
  }
  CHECK(sources.count(SampleSource::sine_sdf) == 1);
  CHECK(sources.count(SampleSource::sine_rls) == 1);

  GenReport rep2;
  const Dataset again = generate_sine_dataset(kH, kKmin, kKmax, 21, 0.002, &rep2);
  REQUIRE(again.samples.size() == d.samples.size());
  bool identical = true;
  for (std::size_t i = 0; i < d.samples.size(); ++i)
    identical = identical && again.samples[i].stencil.values == d.samples[i].stencil.values &&
                again.samples[i].target == d.samples[i].target;
  CHECK(identical);
}

TEST_CASE("circle dataset invariants") {
  const double scale = 0.01;
  const Dataset d = generate_circle_dataset(kH, kKmin, kKmax, 5, scale);
  const CircleGenConfig cfg = CircleGenConfig::make(kH, kKmin, kKmax);
  const auto keep = static_cast<std::size_t>(std::ceil(cfg.n_s_bar() * scale));
  const double step = (kKmax - kKmin) / static_cast<double>(cfg.n_r() - 1);

  std::map<std::pair<long long, SampleSource>, std::size_t> per_radius;
  for (const Sample& s : d.samples) {
    const double kappa = -s.target / kH;
    const long long k = std::llround((kappa - kKmin) / step);
    REQUIRE(k >= 0);
    REQUIRE(k < cfg.n_r());
    // Exact analytic label: -h / r with r = 1 / kappa_k.
    CHECK(std::abs(s.target + kH * cfg.kappa(k)) <= 1e-6);
    CHECK(is_interface_adjacent(s.stencil.values));
    ++per_radius[{k, s.source}];
  }
  CHECK(per_radius.size() == 2 * static_cast<std::size_t>(cfg.n_r()));
  for (const auto& [key, n] : per_radius) CHECK(n <= keep);

  const Dataset again = generate_circle_dataset(kH, kKmin, kKmax, 5, scale);
  REQUIRE(again.samples.size() == d.samples.size());
  for (std::size_t i = 0; i < d.samples.size(); i += 97) CHECK(again.samples[i].stencil.values == d.samples[i].stencil.values);
}

TEST_CASE("bin balancing") {
  const int bins = 20;
  SUBCASE("uniform histogram is untouched") {
    Dataset d = empty_dataset();
    int id = 0;
    for (int b = 0; b < bins; ++b)
      for (int r = 0; r < 5; ++r) d.samples.push_back(tagged(bin_center(d, b, bins), id++));
    const BalanceResult res = bin_balance(d, bins, 2.0, 1);
    CHECK_FALSE(res.unchanged_too_few_bins);
    CHECK(res.dataset.samples.size() == d.samples.size());
  }
  SUBCASE("one heavy bin is cut to K N_b") {
    Dataset d = empty_dataset();
    int id = 0;
    for (int b = 0; b < bins; ++b) {
      const int n = b == 7 ? 3 * 2 * 10 * 3 : (b == 2 ? 3 : 4 + b % 3);
      for (int r = 0; r < n; ++r) d.samples.push_back(tagged(bin_center(d, b, bins), id++));
    }
    const BalanceResult res = bin_balance(d, bins, 2.0, 1);
    CHECK(res.counts_before[7] == 180);
    CHECK(res.counts_after[7] == 6);
    CHECK(res.dataset.samples.size() <= d.samples.size());
    const auto [mn, mx] = std::minmax_element(res.counts_after.begin(), res.counts_after.end());
    CHECK(static_cast<double>(*mx) / static_cast<double>(*mn) <= 2.0);
    // Survivors keep their original relative order.
    for (std::size_t i = 1; i < res.dataset.samples.size(); ++i)
      CHECK(res.dataset.samples[i - 1].stencil.values[0] < res.dataset.samples[i].stencil.values[0]);
    CHECK(bin_balance(d, bins, 2.0, 1).dataset.samples.size() == res.dataset.samples.size());
  }
  SUBCASE("too few occupied bins") {
    Dataset d = empty_dataset();
    for (int r = 0; r < 50; ++r) d.samples.push_back(tagged(bin_center(d, 3, bins), r));
    const BalanceResult res = bin_balance(d, bins, 2.0, 1);
    CHECK(res.unchanged_too_few_bins);
    CHECK(res.dataset.samples.size() == 50);
  }
  CHECK_THROWS_AS(bin_balance(empty_dataset(), 0, 2.0, 1), std::invalid_argument);
}

TEST_CASE("split sizes and determinism") {
  for (const auto& [n, want] : std::vector<std::pair<int, std::array<std::size_t, 3>>>{{100, {70, 15, 15}},
                                                                                      {101, {70, 15, 16}}}) {
    Dataset d = empty_dataset();
    for (int i = 0; i < n; ++i) d.samples.push_back(tagged(-0.1, i));
    const SplitResult s = split(d, 4);
    CHECK(s.train.samples.size() == want[0]);
    CHECK(s.test.samples.size() == want[1]);
    CHECK(s.validation.samples.size() == want[2]);
    std::set<double> ids;
    for (const Dataset* part : {&s.train, &s.test, &s.validation})
      for (const Sample& x : part->samples) ids.insert(x.stencil.values[0]);
    CHECK(ids.size() == static_cast<std::size_t>(n));
    const SplitResult t = split(d, 4);
    for (std::size_t i = 0; i < s.train.samples.size(); ++i)
      CHECK(t.train.samples[i].stencil.values == s.train.samples[i].stencil.values);
  }
  CHECK_THROWS_AS(split(empty_dataset(), 1), std::invalid_argument);
}

TEST_CASE("merge requires a common spacing") {
  Dataset a = empty_dataset();
  a.samples.push_back(tagged(-0.2, 1));
  Dataset b = empty_dataset();
  b.samples.push_back(tagged(-0.3, 2));
  merge_into(a, b);
  CHECK(a.samples.size() == 2);
  b.h = kH / 2;
  CHECK_THROWS_AS(merge_into(a, b), std::invalid_argument);
}

TEST_CASE("dataset files") {
  Dataset d = empty_dataset();
  d.seed = 77;
  Sample s = tagged(-0.123456789012345678, 3);
  s.stencil.values[4] = 1.0 / 3.0;
  s.source = SampleSource::circle_rls;
  s.numerical = -0.12;
  d.samples.push_back(s);
  s.source = SampleSource::sine_sdf;
  s.numerical = std::nan("");
  d.samples.push_back(s);

  std::stringstream ss;
  write_dataset(ss, d);
  const Dataset back = read_dataset(ss);
  CHECK(back.h == d.h);
  CHECK(back.kappa_max == d.kappa_max);
  CHECK(back.seed == 77);
  REQUIRE(back.samples.size() == 2);
  CHECK(back.samples[0].stencil.values == d.samples[0].stencil.values);
  CHECK(back.samples[0].target == d.samples[0].target);
  CHECK(back.samples[0].source == SampleSource::circle_rls);

  const auto dir = std::filesystem::temp_directory_path() / "hcurv_test_datagen";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "d.txt").string();
  save_dataset(d, path);
  save_numerical(d, path + ".num");
  Dataset loaded = load_dataset(path);
  load_numerical(loaded, path + ".num");
  CHECK(loaded.samples[0].numerical == -0.12);
  CHECK(std::isnan(loaded.samples[1].numerical));
  loaded.samples.pop_back();
  CHECK_THROWS_AS(load_numerical(loaded, path + ".num"), ParseError);
  std::filesystem::remove_all(dir);

  std::stringstream bad_tag("0.0078125 0.5 85 1 1\n0 0 0 0 0 0 0 0 0 -0.1 square\n");
  CHECK_THROWS_AS(read_dataset(bad_tag), ParseError);
  std::stringstream short_file("0.0078125 0.5 85 1 2\n0 0 0 0 0 0 0 0 0 -0.1 sine_sdf\n");
  CHECK_THROWS_AS(read_dataset(short_file), ParseError);
  CHECK_THROWS_AS(load_dataset("/nonexistent/x.txt"), std::exception);
}
