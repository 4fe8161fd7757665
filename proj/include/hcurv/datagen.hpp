#pragma once

// Synthetic (stencil, h*kappa) datasets from sine and circle interfaces,
// stored in the negative half of the curvature spectrum, plus histogram
// rebalancing and the train/test/validation split.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hcurv/grid_levelset.hpp"

namespace hcurv {

enum class SampleSource { sine_sdf, sine_rls, circle_sdf, circle_rls };

const char* to_string(SampleSource s);
/// Throws std::invalid_argument on an unknown tag.
SampleSource source_from_string(const std::string& tag);
inline bool is_rls(SampleSource s) { return s == SampleSource::sine_rls || s == SampleSource::circle_rls; }

struct Sample {
  Stencil9 stencil;
  double target = 0.0;
  SampleSource source = SampleSource::sine_sdf;
  /// G_h estimate at the node, sign-normalized like the target. NaN when
  /// unavailable. Kept in memory and in a sidecar file, not in the dataset file.
  double numerical = std::numeric_limits<double>::quiet_NaN();
};

struct Dataset {
  std::vector<Sample> samples;
  double h = 0.0;
  double kappa_min = 0.5;
  double kappa_max = 256.0 / 3.0;
  double kappa_flat = 5.0;
  double c = 0.1;
  std::uint64_t seed = 0;
};

struct GenReport {
  std::size_t sweeps = 0;              // sweep entries actually visited
  std::size_t closest_point_failures = 0;
  std::size_t distance_fallbacks = 0;  // field nodes filled with polyline distance
  std::size_t numerical_failures = 0;  // samples without a G_h estimate
  std::size_t skipped_rls = 0;         // rls stencils without a sign change
};

struct SineGenConfig {
  double h = 0x1.0p-7;
  double h_base = 0x1.0p-7;
  int n_a = 33;
  double a_min = 0.0;  // 1.5 h
  double a_max = 0.25;
  int n_theta = 34;
  double kappa_min = 0.5;
  double kappa_max = 256.0 / 3.0;

  static SineGenConfig make(double h, double kappa_min, double kappa_max);

  double l_p() const;
  double omega_min(double a) const;
  double omega_max(double a) const;
  double mu_max_kappa() const;
  int n_omega(double a) const;
  double amplitude(int k) const;
  double frequency(double a, int k) const;
  /// theta over [-pi/4, pi/4) with n_theta - 1 values.
  double tilt(int k) const;
};

struct CircleGenConfig {
  double h = 0x1.0p-7;
  double h_base = 0x1.0p-7;
  double kappa_min = 0.5;
  double kappa_max = 256.0 / 3.0;
  double kappa_flat = 5.0;

  static CircleGenConfig make(double h, double kappa_min, double kappa_max);

  double r_min() const { return 1.0 / kappa_max; }
  double r_max() const { return 1.0 / kappa_min; }
  double r_flat() const { return 1.0 / kappa_flat; }
  long long n_r() const;
  long long n_s() const;
  long long n_s_bar() const;
  /// Curvature of radius index k, equally spaced over [kappa_min, kappa_max].
  double kappa(long long k) const;
};

/// 0.05 + 0.95 u^2 with u = |kappa| / mu clamped to [0, 1].
double acceptance_probability(double abs_kappa, double mu_max_kappa);

/// Sweep-thinning rule: index k survives when floor((k+1) s) != floor(k s).
bool keep_sweep_index(std::size_t k, double scale);

/// Samples collected from one sine interface (one (A, w, theta) entry).
std::vector<Sample> collect_sine_samples(const SineGenConfig& cfg, double amplitude, double frequency, double tilt,
                                         std::mt19937_64& rng, GenReport* report = nullptr);

Dataset generate_sine_dataset(double h, double kappa_min, double kappa_max, std::uint64_t seed, double scale,
                              GenReport* report = nullptr);
Dataset generate_circle_dataset(double h, double kappa_min, double kappa_max, std::uint64_t seed, double scale,
                                GenReport* report = nullptr);

/// (phi, kappa) -> (-phi, -kappa) when kappa > 0. Throws on kappa == 0.
std::pair<Stencil9, double> negative_normalize(const Stencil9& stencil, double kappa);

/// Counterclockwise quarter turn of the 3x3 block.
Stencil9 rotate_stencil_90(const Stencil9& stencil);

struct BalanceResult {
  Dataset dataset;
  bool unchanged_too_few_bins = false;
  std::vector<std::size_t> counts_before;
  std::vector<std::size_t> counts_after;
};

/// Histogram targets over [-h kappa_max, -C h kappa_flat] and subsample every
/// bin down to floor(K N_b), N_b the smallest bin count.
BalanceResult bin_balance(const Dataset& dataset, int n_bins, double k, std::uint64_t seed);

struct SplitResult {
  Dataset train;
  Dataset test;
  Dataset validation;
};

SplitResult split(const Dataset& dataset, std::uint64_t seed);

/// Appends `other` to `into`; both must share h.
void merge_into(Dataset& into, const Dataset& other);

// Dataset file: "h kappa_min kappa_max seed n_samples", then per sample nine
// stencil values, target and source tag.
void write_dataset(std::ostream& out, const Dataset& d);
Dataset read_dataset(std::istream& in, const std::string& source = "<stream>");
void save_dataset(const Dataset& d, const std::string& path);
Dataset load_dataset(const std::string& path);

// Sidecar with one G_h value per sample ("nan" when unavailable).
void save_numerical(const Dataset& d, const std::string& path);
/// Fills Sample::numerical; throws ParseError on count mismatch.
void load_numerical(Dataset& d, const std::string& path);

}  // namespace hcurv
