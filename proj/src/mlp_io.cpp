#include <fstream>
#include <ostream>

#include "hcurv/errors.hpp"
#include "hcurv/neural.hpp"
#include "hcurv/text_io.hpp"

// Model file layout:
//   mlp 4
//   hidden N1 N2 N3 N4
//   relu_first 0|1
//   preprocessor pca|std
//   h <spacing>
//   kappa_flat <threshold>
//   W1 <rows> <cols>   followed by one line per row
//   b1 <size>          followed by one line of values
//   ... through W5 / b5

namespace hcurv {

namespace {

std::vector<std::string> keyed(textio::LineReader& r, const std::string& key, std::size_t n_values) {
  auto f = r.next_fields("'" + key + "' line");
  if (f.empty() || f[0] != key) r.fail("expected '" + key + "'");
  if (f.size() != n_values + 1)
    r.fail("'" + key + "': expected " + std::to_string(n_values) + " values, got " + std::to_string(f.size() - 1));
  return f;
}

Eigen::Index dim(textio::LineReader& r, const std::string& token, std::size_t field, Eigen::Index expected) {
  const long long v = r.to_int(token, field);
  if (v != expected)
    r.fail("field " + std::to_string(field) + ": dimension " + std::to_string(v) + " does not match expected " +
           std::to_string(expected));
  return static_cast<Eigen::Index>(v);
}

}  // namespace

void write_model(std::ostream& out, const MlpModel& m) {
  m.validate();
  std::string s = "mlp 4\nhidden";
  for (int n : m.arch.hidden) s += ' ' + std::to_string(n);
  s += "\nrelu_first ";
  s += m.arch.relu_first_hidden ? "1" : "0";
  s += "\npreprocessor ";
  s += to_string(m.preprocessor);
  s += "\nh ";
  textio::append_double(s, m.h);
  s += "\nkappa_flat ";
  textio::append_double(s, m.kappa_flat);
  s += '\n';
  out << s;
  for (int l = 0; l < 5; ++l) {
    s = "W" + std::to_string(l + 1) + ' ' + std::to_string(m.w[l].rows()) + ' ' + std::to_string(m.w[l].cols()) + '\n';
    for (Eigen::Index r = 0; r < m.w[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < m.w[l].cols(); ++c) {
        if (c) s += ' ';
        textio::append_double(s, m.w[l](r, c));
      }
      s += '\n';
    }
    s += "b" + std::to_string(l + 1) + ' ' + std::to_string(m.b[l].size()) + '\n';
    for (Eigen::Index k = 0; k < m.b[l].size(); ++k) {
      if (k) s += ' ';
      textio::append_double(s, m.b[l](k));
    }
    s += '\n';
    out << s;
  }
}

MlpModel read_model(std::istream& in, const std::string& source) {
  textio::LineReader r(in, source);
  const auto head = r.next_fields("header 'mlp 4'");
  if (head.size() != 2 || head[0] != "mlp") r.fail("expected header 'mlp 4'");
  if (r.to_int(head[1], 2) != 4) r.fail("field 2: only four hidden layers are supported, got " + head[1]);

  MlpArchitecture arch;
  const auto hid = keyed(r, "hidden", 4);
  for (std::size_t k = 0; k < 4; ++k) {
    const long long n = r.to_int(hid[k + 1], k + 2);
    if (n < 1) r.fail("field " + std::to_string(k + 2) + ": layer size must be positive");
    arch.hidden[k] = static_cast<int>(n);
  }
  const auto rf = keyed(r, "relu_first", 1);
  if (rf[1] != "0" && rf[1] != "1") r.fail("field 2: relu_first must be 0 or 1");
  arch.relu_first_hidden = rf[1] == "1";

  MlpModel m = MlpModel::zeros(arch);
  const auto pp = keyed(r, "preprocessor", 1);
  if (pp[1] == "pca")
    m.preprocessor = PreprocessorKind::pca;
  else if (pp[1] == "std")
    m.preprocessor = PreprocessorKind::std;
  else
    r.fail("field 2: unknown preprocessor '" + pp[1] + "'");
  m.h = r.to_double(keyed(r, "h", 1)[1], 2);
  m.kappa_flat = r.to_double(keyed(r, "kappa_flat", 1)[1], 2);

  for (int l = 0; l < 5; ++l) {
    const std::string wkey = "W" + std::to_string(l + 1);
    const auto wh = keyed(r, wkey, 2);
    const Eigen::Index rows = dim(r, wh[1], 2, m.w[l].rows());
    const Eigen::Index cols = dim(r, wh[2], 3, m.w[l].cols());
    for (Eigen::Index i = 0; i < rows; ++i) {
      const auto f = r.next_fields(wkey + " row");
      if (static_cast<Eigen::Index>(f.size()) != cols)
        r.fail(wkey + " row: expected " + std::to_string(cols) + " values, got " + std::to_string(f.size()));
      for (Eigen::Index c = 0; c < cols; ++c) m.w[l](i, c) = r.to_double(f[static_cast<std::size_t>(c)], static_cast<std::size_t>(c) + 1);
    }
    const std::string bkey = "b" + std::to_string(l + 1);
    const auto bh = keyed(r, bkey, 1);
    const Eigen::Index size = dim(r, bh[1], 2, m.b[l].size());
    const auto f = r.next_fields(bkey + " values");
    if (static_cast<Eigen::Index>(f.size()) != size)
      r.fail(bkey + ": expected " + std::to_string(size) + " values, got " + std::to_string(f.size()));
    for (Eigen::Index k = 0; k < size; ++k) m.b[l](k) = r.to_double(f[static_cast<std::size_t>(k)], static_cast<std::size_t>(k) + 1);
  }
  if (!r.at_end()) r.fail("trailing data after b5");
  return m;
}

void save_model(const MlpModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_model(out, model);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

MlpModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_model(in, path);
}

}  // namespace hcurv
