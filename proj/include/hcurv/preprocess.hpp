#pragma once

// Input preprocessing for the curvature network: PCA with whitening (default)
// or plain per-feature standardization, fitted on training stencils.

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace hcurv {

using Feature9 = std::array<double, 9>;

enum class PreprocessorKind { pca, std };

const char* to_string(PreprocessorKind k);

struct PcaParams {
  PreprocessorKind kind = PreprocessorKind::pca;
  double h = 0.0;  // spacing of the pipeline that produced the fit; 0 if unknown
  Feature9 mu{};
  Feature9 sigma{};
  /// Row-major 9x9; column k is the k-th principal direction.
  std::array<double, 81> v{};

  double V(int r, int c) const { return v[static_cast<std::size_t>(r * 9 + c)]; }
  static PcaParams identity();
  friend bool operator==(const PcaParams&, const PcaParams&) = default;
};

/// Components are sorted by decreasing variance; each column's
/// largest-magnitude entry is made positive. Throws RankDeficiency when a
/// component's standard deviation is below 1e-12 or below 1e-7 of the
/// leading one, and std::invalid_argument for fewer than 10 rows.
PcaParams fit_pca(const std::vector<Feature9>& rows, double h = 0.0);
/// Per-feature mean and standard deviation; V is the identity.
PcaParams fit_standardize(const std::vector<Feature9>& rows, double h = 0.0);

/// (V^T (phi - mu)) / sigma, element-wise.
Feature9 transform(const PcaParams& params, const Feature9& phi);

void write_pca(std::ostream& out, const PcaParams& params);
PcaParams read_pca(std::istream& in, const std::string& source = "<stream>");
void save_pca(const PcaParams& params, const std::string& path);
PcaParams load_pca(const std::string& path);

}  // namespace hcurv
