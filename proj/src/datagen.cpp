#include "hcurv/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hcurv/errors.hpp"
#include "hcurv/interfaces.hpp"
#include "hcurv/random.hpp"

namespace hcurv {

namespace {

constexpr int kReinitIterations = 10;
// Nodes farther than this (in units of h) from a sine keep the polyline
// distance. Ten reinitialization sweeps reach at most ten nodes, so interface
// samples never see them.
constexpr double kExactBand = 16.0;
constexpr std::uint64_t kCircleStreams = 1ULL << 40;
constexpr std::uint64_t kBalanceStream = 1ULL << 41;
constexpr std::uint64_t kSplitStream = 1ULL << 42;

void check_generation_args(double h, double kappa_min, double kappa_max, double h_base) {
  if (!(kappa_min > 0.0) || !(kappa_max > kappa_min)) throw std::invalid_argument("need 0 < kappa_min < kappa_max");
  if (!(h > 0.0) || h > h_base) throw std::invalid_argument("grid spacing must satisfy 0 < h <= 2^-7");
}

void check_scale(double scale) {
  if (!(scale > 0.0) || scale > 1.0) throw std::invalid_argument("scale must lie in (0, 1]");
}

void add(GenReport& into, const GenReport& r) {
  into.sweeps += r.sweeps;
  into.closest_point_failures += r.closest_point_failures;
  into.distance_fallbacks += r.distance_fallbacks;
  into.numerical_failures += r.numerical_failures;
  into.skipped_rls += r.skipped_rls;
}

double numerical_or_nan(const LevelSetField& f, const CurvatureField& k, Node n, GenReport& report) {
  try {
    return compound_numerical(f, k, n).hk;
  } catch (const DegenerateGradient&) {
    ++report.numerical_failures;
    return std::numeric_limits<double>::quiet_NaN();
  }
}

// Emits the stencil and its three quarter turns.
void push_rotations(std::vector<Sample>& out, Sample s) {
  out.push_back(s);
  for (int r = 0; r < 3; ++r) {
    s.stencil = rotate_stencil_90(s.stencil);
    out.push_back(s);
  }
}

Sample make_sample(const Stencil9& raw, double hk, SampleSource src, double numerical) {
  auto [st, t] = negative_normalize(raw, hk);
  Sample s;
  s.stencil = st;
  s.target = t;
  s.source = src;
  s.numerical = hk > 0.0 ? -numerical : numerical;
  return s;
}

std::vector<Sample> random_subset(std::vector<Sample> v, std::size_t keep, std::mt19937_64& rng) {
  if (v.size() <= keep) return v;
  for (std::size_t i = 0; i < keep; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_index(rng, v.size() - i));
    std::swap(v[i], v[j]);
  }
  v.resize(keep);
  return v;
}

}  // namespace

const char* to_string(SampleSource s) {
  switch (s) {
    case SampleSource::sine_sdf: return "sine_sdf";
    case SampleSource::sine_rls: return "sine_rls";
    case SampleSource::circle_sdf: return "circle_sdf";
    case SampleSource::circle_rls: return "circle_rls";
  }
  return "?";
}

SampleSource source_from_string(const std::string& tag) {
  if (tag == "sine_sdf") return SampleSource::sine_sdf;
  if (tag == "sine_rls") return SampleSource::sine_rls;
  if (tag == "circle_sdf") return SampleSource::circle_sdf;
  if (tag == "circle_rls") return SampleSource::circle_rls;
  throw std::invalid_argument("unknown sample source '" + tag + "'");
}

SineGenConfig SineGenConfig::make(double h, double kappa_min, double kappa_max) {
  SineGenConfig c;
  check_generation_args(h, kappa_min, kappa_max, c.h_base);
  c.h = h;
  c.a_min = 1.5 * h;
  c.kappa_min = kappa_min;
  c.kappa_max = kappa_max;
  return c;
}

double SineGenConfig::l_p() const { return 1.0 + std::log2(h_base / h) / 3.0; }
double SineGenConfig::omega_min(double a) const { return std::sqrt(kappa_max / (4.0 * a)); }
double SineGenConfig::omega_max(double a) const { return std::sqrt(kappa_max / a); }
double SineGenConfig::mu_max_kappa() const { return 0.5 * (0.25 * kappa_max + kappa_max); }

int SineGenConfig::n_omega(double a) const {
  const double d_crests = 0.5 * std::numbers::pi * (1.0 / omega_min(a) - 1.0 / omega_max(a));
  return static_cast<int>(std::ceil(d_crests / h_base * l_p())) + 1;
}

double SineGenConfig::amplitude(int k) const { return a_min + k * (a_max - a_min) / (n_a - 1); }

double SineGenConfig::frequency(double a, int k) const {
  const double lo = omega_min(a);
  const double hi = omega_max(a);
  return lo + k * (hi - lo) / (n_omega(a) - 1);
}

double SineGenConfig::tilt(int k) const {
  return -0.25 * std::numbers::pi + k * (0.5 * std::numbers::pi) / (n_theta - 1);
}

CircleGenConfig CircleGenConfig::make(double h, double kappa_min, double kappa_max) {
  CircleGenConfig c;
  check_generation_args(h, kappa_min, kappa_max, c.h_base);
  c.h = h;
  c.kappa_min = kappa_min;
  c.kappa_max = kappa_max;
  return c;
}

long long CircleGenConfig::n_r() const {
  return static_cast<long long>(std::ceil(2.0 * ((r_max() - r_min()) / h_base + 1.0) * (std::log2(h_base / h) + 1.0)));
}

long long CircleGenConfig::n_s() const {
  const double rf = r_flat();
  return static_cast<long long>(std::ceil(5.0 * std::numbers::pi / (h * h) * (rf * rf - (rf - h) * (rf - h))));
}

long long CircleGenConfig::n_s_bar() const {
  const double rf = r_flat();
  return static_cast<long long>(
      std::ceil(5.0 * std::numbers::pi / (h_base * h_base) * (rf * rf - (rf - h_base) * (rf - h_base))));
}

double CircleGenConfig::kappa(long long k) const {
  const long long n = n_r();
  if (n == 1) return kappa_min;
  return kappa_min + static_cast<double>(k) * (kappa_max - kappa_min) / static_cast<double>(n - 1);
}

double acceptance_probability(double abs_kappa, double mu_max_kappa) {
  const double u = std::clamp(abs_kappa / mu_max_kappa, 0.0, 1.0);
  return std::min(1.0, 0.05 + 0.95 * u * u);
}

bool keep_sweep_index(std::size_t k, double scale) {
  return std::floor(static_cast<double>(k + 1) * scale) != std::floor(static_cast<double>(k) * scale);
}

std::pair<Stencil9, double> negative_normalize(const Stencil9& stencil, double kappa) {
  if (kappa == 0.0) throw std::invalid_argument("negative_normalize: zero curvature has no sign");
  if (kappa < 0.0) return {stencil, kappa};
  Stencil9 out = stencil;
  for (double& v : out.values) v = -v;
  return {out, -kappa};
}

Stencil9 rotate_stencil_90(const Stencil9& s) {
  Stencil9 out;
  out.h = s.h;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.values[r * 3 + c] = s.values[c * 3 + (2 - r)];
  return out;
}

std::vector<Sample> collect_sine_samples(const SineGenConfig& cfg, double amplitude, double frequency, double tilt,
                                         std::mt19937_64& rng, GenReport* report) {
  GenReport local;
  const double h = cfg.h;
  const double x0 = uniform(rng, -0.5 * h, 0.5 * h);
  const double y0 = uniform(rng, -0.5 * h, 0.5 * h);
  const SineInterface iface(amplitude, frequency, tilt, {x0, y0}, h / 5.0);
  const Grid grid = Grid::square(-0.5, 0.5, h);

  std::vector<double> phi(grid.size());
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      const Point p = grid.point(i, j);
      double v = sine_level_set(p, iface, false);
      if (std::abs(v) <= kExactBand * h) {
        try {
          v = sine_level_set(p, iface, true);
        } catch (const ConvergenceError&) {
          ++local.distance_fallbacks;
        }
      }
      phi[grid.index(i, j)] = v;
    }
  }
  const LevelSetField sdf(grid, std::move(phi));
  const LevelSetField rls = reinitialize(sdf, kReinitIterations);
  const CurvatureField k_sdf = numerical_curvature_field(sdf);
  const CurvatureField k_rls = numerical_curvature_field(rls);
  const double mu = cfg.mu_max_kappa();

  std::vector<Sample> out;
  for (const Node n : interface_nodes(sdf)) {
    double kappa = 0.0;
    try {
      kappa = sine_closest_point(grid.point(n), iface).kappa;
    } catch (const ConvergenceError&) {
      ++local.closest_point_failures;
      continue;
    }
    const double ak = std::abs(kappa);
    if (ak < cfg.kappa_min || ak > cfg.kappa_max) continue;
    if (!(uniform01(rng) < acceptance_probability(ak, mu))) continue;

    const double hk = h * kappa;
    push_rotations(out, make_sample(stencil_extract(sdf, n), hk, SampleSource::sine_sdf,
                                    numerical_or_nan(sdf, k_sdf, n, local)));
    const Stencil9 r = stencil_extract(rls, n);
    if (!is_interface_adjacent(r.values)) {
      ++local.skipped_rls;
      continue;
    }
    push_rotations(out, make_sample(r, hk, SampleSource::sine_rls, numerical_or_nan(rls, k_rls, n, local)));
  }
  local.sweeps = 1;
  if (report) add(*report, local);
  return out;
}

Dataset generate_sine_dataset(double h, double kappa_min, double kappa_max, std::uint64_t seed, double scale,
                              GenReport* report) {
  check_scale(scale);
  const SineGenConfig cfg = SineGenConfig::make(h, kappa_min, kappa_max);

  struct Entry {
    double a, w, theta;
    std::size_t index;
  };
  std::vector<Entry> entries;
  std::size_t k = 0;
  for (int ia = 0; ia < cfg.n_a; ++ia) {
    const double a = cfg.amplitude(ia);
    const int nw = cfg.n_omega(a);
    for (int iw = 0; iw < nw; ++iw) {
      const double w = cfg.frequency(a, iw);
      for (int it = 0; it < cfg.n_theta - 1; ++it, ++k)
        if (keep_sweep_index(k, scale)) entries.push_back({a, w, cfg.tilt(it), k});
    }
  }

  std::vector<std::vector<Sample>> parts(entries.size());
  std::vector<GenReport> reports(entries.size());
  parallel_for(entries.size(), [&](std::size_t e) {
    auto rng = make_stream(seed, entries[e].index);
    parts[e] = collect_sine_samples(cfg, entries[e].a, entries[e].w, entries[e].theta, rng, &reports[e]);
  });

  Dataset d;
  d.h = h;
  d.kappa_min = kappa_min;
  d.kappa_max = kappa_max;
  d.seed = seed;
  for (std::size_t e = 0; e < parts.size(); ++e) {
    d.samples.insert(d.samples.end(), parts[e].begin(), parts[e].end());
    if (report) add(*report, reports[e]);
  }
  return d;
}

Dataset generate_circle_dataset(double h, double kappa_min, double kappa_max, std::uint64_t seed, double scale,
                                GenReport* report) {
  check_scale(scale);
  const CircleGenConfig cfg = CircleGenConfig::make(h, kappa_min, kappa_max);
  const auto n_r = static_cast<std::size_t>(cfg.n_r());
  const auto need = static_cast<std::size_t>(std::ceil(static_cast<double>(cfg.n_s()) * scale));
  const auto keep = static_cast<std::size_t>(std::ceil(static_cast<double>(cfg.n_s_bar()) * scale));

  std::vector<std::vector<Sample>> parts(n_r);
  std::vector<GenReport> reports(n_r);
  parallel_for(n_r, [&](std::size_t k) {
    auto rng = make_stream(seed, kCircleStreams + k);
    GenReport& rep = reports[k];
    const double kappa = cfg.kappa(static_cast<long long>(k));
    const double r = 1.0 / kappa;
    const double hk = h * kappa;
    const Grid grid = Grid::centered(r + 8.0 * h, h);

    std::vector<Sample> s_sdf;
    std::vector<Sample> s_rls;
    // Guard against a pathological radius that never yields samples.
    for (int round = 0; round < 100000 && (s_sdf.size() < need || s_rls.size() < need); ++round) {
      const CircleInterface c{{uniform(rng, -0.5 * h, 0.5 * h), uniform(rng, -0.5 * h, 0.5 * h)}, r};
      const auto sdf = LevelSetField::sample(grid, [&](Point p) { return circle_level_set(p, c, true); });
      const auto rls = reinitialize(LevelSetField::sample(grid, [&](Point p) { return circle_level_set(p, c, false); }),
                                    kReinitIterations);
      const CurvatureField k_sdf = numerical_curvature_field(sdf);
      const CurvatureField k_rls = numerical_curvature_field(rls);
      for (const Node n : interface_nodes(sdf)) {
        s_sdf.push_back(make_sample(stencil_extract(sdf, n), hk, SampleSource::circle_sdf,
                                    numerical_or_nan(sdf, k_sdf, n, rep)));
        const Stencil9 st = stencil_extract(rls, n);
        if (!is_interface_adjacent(st.values)) {
          ++rep.skipped_rls;
          continue;
        }
        s_rls.push_back(make_sample(st, hk, SampleSource::circle_rls, numerical_or_nan(rls, k_rls, n, rep)));
      }
    }
    rep.sweeps = 1;
    auto a = random_subset(std::move(s_sdf), keep, rng);
    auto b = random_subset(std::move(s_rls), keep, rng);
    parts[k] = std::move(a);
    parts[k].insert(parts[k].end(), b.begin(), b.end());
  });

  Dataset d;
  d.h = h;
  d.kappa_min = kappa_min;
  d.kappa_max = kappa_max;
  d.seed = seed;
  for (std::size_t k = 0; k < n_r; ++k) {
    d.samples.insert(d.samples.end(), parts[k].begin(), parts[k].end());
    if (report) add(*report, reports[k]);
  }
  return d;
}

BalanceResult bin_balance(const Dataset& dataset, int n_bins, double k, std::uint64_t seed) {
  if (n_bins < 1) throw std::invalid_argument("bin_balance: need at least one bin");
  if (!(k >= 1.0)) throw std::invalid_argument("bin_balance: K must be at least 1");
  const double lo = -dataset.h * dataset.kappa_max;
  const double hi = -dataset.c * dataset.h * dataset.kappa_flat;

  const auto nb = static_cast<std::size_t>(n_bins);
  std::vector<std::vector<std::size_t>> members(nb);
  for (std::size_t s = 0; s < dataset.samples.size(); ++s) {
    const double u = (dataset.samples[s].target - lo) / (hi - lo);
    const auto b = static_cast<std::size_t>(std::clamp(std::floor(u * n_bins), 0.0, static_cast<double>(nb - 1)));
    members[b].push_back(s);
  }

  BalanceResult res;
  for (const auto& m : members) res.counts_before.push_back(m.size());
  const auto occupied = static_cast<std::size_t>(
      std::count_if(members.begin(), members.end(), [](const auto& m) { return !m.empty(); }));
  if (occupied < nb) {
    res.dataset = dataset;
    res.unchanged_too_few_bins = true;
    res.counts_after = res.counts_before;
    return res;
  }

  const std::size_t n_min = *std::min_element(res.counts_before.begin(), res.counts_before.end());
  const auto cap = static_cast<std::size_t>(std::floor(k * static_cast<double>(n_min)));
  auto rng = make_stream(seed, kBalanceStream);
  std::vector<unsigned char> kept(dataset.samples.size(), 1);
  for (auto& m : members) {
    if (m.size() <= cap) continue;
    shuffle(m, rng);
    for (std::size_t i = cap; i < m.size(); ++i) kept[m[i]] = 0;
    m.resize(cap);
  }
  for (const auto& m : members) res.counts_after.push_back(m.size());

  res.dataset = dataset;
  res.dataset.samples.clear();
  for (std::size_t s = 0; s < dataset.samples.size(); ++s)
    if (kept[s]) res.dataset.samples.push_back(dataset.samples[s]);
  return res;
}

SplitResult split(const Dataset& dataset, std::uint64_t seed) {
  if (dataset.samples.empty()) throw std::invalid_argument("split: empty dataset");
  const std::size_t n = dataset.samples.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  auto rng = make_stream(seed, kSplitStream);
  shuffle(order, rng);

  const std::size_t n_train = n * 70 / 100;
  const std::size_t n_test = n * 15 / 100;
  SplitResult out{dataset, dataset, dataset};
  out.train.samples.clear();
  out.test.samples.clear();
  out.validation.samples.clear();
  for (std::size_t i = 0; i < n; ++i) {
    Dataset& dst = i < n_train ? out.train : (i < n_train + n_test ? out.test : out.validation);
    dst.samples.push_back(dataset.samples[order[i]]);
  }
  return out;
}

void merge_into(Dataset& into, const Dataset& other) {
  if (into.samples.empty() && into.h == 0.0) {
    into = other;
    return;
  }
  if (into.h != other.h) throw std::invalid_argument("merge_into: datasets built for different h");
  into.samples.insert(into.samples.end(), other.samples.begin(), other.samples.end());
}

}  // namespace hcurv
