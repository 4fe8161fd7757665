#include "hcurv/preprocess.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "hcurv/errors.hpp"
#include "hcurv/text_io.hpp"

namespace hcurv {

namespace {

constexpr double kAbsoluteSigmaFloor = 1e-12;
constexpr double kRelativeSigmaFloor = 1e-7;
constexpr std::size_t kMinRows = 10;

void check_rows(const std::vector<Feature9>& rows) {
  if (rows.size() < kMinRows) throw std::invalid_argument("preprocessor fit needs at least 10 rows");
}

Feature9 column_means(const std::vector<Feature9>& rows) {
  Feature9 mu{};
  for (const auto& r : rows)
    for (std::size_t k = 0; k < 9; ++k) mu[k] += r[k];
  for (double& m : mu) m /= static_cast<double>(rows.size());
  return mu;
}

void check_sigma(const Feature9& sigma) {
  const double top = *std::max_element(sigma.begin(), sigma.end());
  for (std::size_t k = 0; k < 9; ++k)
    if (!(sigma[k] >= kAbsoluteSigmaFloor) || sigma[k] < kRelativeSigmaFloor * top)
      throw RankDeficiency("training data is rank deficient: component " + std::to_string(k) + " has sigma " +
                               textio::format_double(sigma[k]),
                           k);
}

void append_row(std::string& line, const double* v) {
  for (int k = 0; k < 9; ++k) {
    if (k) line += ' ';
    textio::append_double(line, v[k]);
  }
}

Feature9 read_row(textio::LineReader& reader, const char* what) {
  const auto f = reader.next_fields(what);
  if (f.size() != 9) reader.fail(std::string(what) + ": expected 9 values, got " + std::to_string(f.size()));
  Feature9 out{};
  for (std::size_t k = 0; k < 9; ++k) out[k] = reader.to_double(f[k], k + 1);
  return out;
}

}  // namespace

const char* to_string(PreprocessorKind k) { return k == PreprocessorKind::pca ? "pca" : "std"; }

PcaParams PcaParams::identity() {
  PcaParams p;
  p.sigma.fill(1.0);
  for (int k = 0; k < 9; ++k) p.v[static_cast<std::size_t>(k * 10)] = 1.0;
  return p;
}

PcaParams fit_pca(const std::vector<Feature9>& rows, double h) {
  check_rows(rows);
  PcaParams p;
  p.kind = PreprocessorKind::pca;
  p.h = h;
  p.mu = column_means(rows);

  Eigen::Matrix<double, 9, 9> cov = Eigen::Matrix<double, 9, 9>::Zero();
  for (const auto& r : rows) {
    Eigen::Matrix<double, 9, 1> d;
    for (int k = 0; k < 9; ++k) d(k) = r[static_cast<std::size_t>(k)] - p.mu[static_cast<std::size_t>(k)];
    cov.selfadjointView<Eigen::Lower>().rankUpdate(d);
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(rows.size() - 1);

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 9, 9>> eig(cov);
  if (eig.info() != Eigen::Success) throw std::runtime_error("fit_pca: eigen decomposition failed");
  // Eigen sorts ascending; components go out by decreasing variance.
  for (int c = 0; c < 9; ++c) {
    const int src = 8 - c;
    Eigen::Matrix<double, 9, 1> col = eig.eigenvectors().col(src);
    int big = 0;
    for (int r = 1; r < 9; ++r)
      if (std::abs(col(r)) > std::abs(col(big))) big = r;
    if (col(big) < 0.0) col = -col;
    for (int r = 0; r < 9; ++r) p.v[static_cast<std::size_t>(r * 9 + c)] = col(r);
    p.sigma[static_cast<std::size_t>(c)] = std::sqrt(std::max(eig.eigenvalues()(src), 0.0));
  }
  check_sigma(p.sigma);
  return p;
}

PcaParams fit_standardize(const std::vector<Feature9>& rows, double h) {
  check_rows(rows);
  PcaParams p = PcaParams::identity();
  p.kind = PreprocessorKind::std;
  p.h = h;
  p.mu = column_means(rows);
  Feature9 var{};
  for (const auto& r : rows)
    for (std::size_t k = 0; k < 9; ++k) var[k] += (r[k] - p.mu[k]) * (r[k] - p.mu[k]);
  for (std::size_t k = 0; k < 9; ++k) p.sigma[k] = std::sqrt(var[k] / static_cast<double>(rows.size() - 1));
  check_sigma(p.sigma);
  return p;
}

Feature9 transform(const PcaParams& p, const Feature9& phi) {
  Feature9 centered{};
  for (std::size_t k = 0; k < 9; ++k) centered[k] = phi[k] - p.mu[k];
  Feature9 out{};
  for (int c = 0; c < 9; ++c) {
    double acc = 0.0;
    for (int r = 0; r < 9; ++r) acc += p.V(r, c) * centered[static_cast<std::size_t>(r)];
    out[static_cast<std::size_t>(c)] = acc / p.sigma[static_cast<std::size_t>(c)];
  }
  return out;
}

void write_pca(std::ostream& out, const PcaParams& p) {
  std::string line = std::string(to_string(p.kind)) + " 9\nh ";
  textio::append_double(line, p.h);
  line += '\n';
  append_row(line, p.mu.data());
  line += '\n';
  append_row(line, p.sigma.data());
  line += '\n';
  if (p.kind == PreprocessorKind::pca) {
    for (int r = 0; r < 9; ++r) {
      append_row(line, p.v.data() + r * 9);
      line += '\n';
    }
  }
  out << line;
}

PcaParams read_pca(std::istream& in, const std::string& source) {
  textio::LineReader reader(in, source);
  const auto header = reader.next_fields("header 'pca 9' or 'std 9'");
  if (header.size() != 2 || (header[0] != "pca" && header[0] != "std") || header[1] != "9")
    reader.fail("header: expected 'pca 9' or 'std 9'");
  PcaParams p = PcaParams::identity();
  p.kind = header[0] == "pca" ? PreprocessorKind::pca : PreprocessorKind::std;

  const auto hline = reader.next_fields("'h <spacing>' line");
  if (hline.size() != 2 || hline[0] != "h") reader.fail("expected 'h <spacing>'");
  p.h = reader.to_double(hline[1], 2);
  p.mu = read_row(reader, "mean row");
  p.sigma = read_row(reader, "sigma row");
  for (std::size_t k = 0; k < 9; ++k)
    if (!(p.sigma[k] > 0.0)) reader.fail("sigma row: field " + std::to_string(k + 1) + " must be positive");
  if (p.kind == PreprocessorKind::pca) {
    for (int r = 0; r < 9; ++r) {
      const Feature9 row = read_row(reader, "component matrix row");
      std::copy(row.begin(), row.end(), p.v.begin() + r * 9);
    }
  }
  if (!reader.at_end()) reader.fail("trailing data");
  return p;
}

void save_pca(const PcaParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_pca(out, params);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

PcaParams load_pca(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_pca(in, path);
}

}  // namespace hcurv
