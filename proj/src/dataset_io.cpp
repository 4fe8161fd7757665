#include <cmath>
#include <fstream>
#include <ostream>

#include "hcurv/datagen.hpp"
#include "hcurv/errors.hpp"
#include "hcurv/text_io.hpp"

namespace hcurv {

void write_dataset(std::ostream& out, const Dataset& d) {
  std::string line;
  textio::append_double(line, d.h);
  line += ' ';
  textio::append_double(line, d.kappa_min);
  line += ' ';
  textio::append_double(line, d.kappa_max);
  line += ' ' + std::to_string(d.seed) + ' ' + std::to_string(d.samples.size());
  out << line << '\n';
  for (const Sample& s : d.samples) {
    line.clear();
    for (double v : s.stencil.values) {
      textio::append_double(line, v);
      line += ' ';
    }
    textio::append_double(line, s.target);
    line += ' ';
    line += to_string(s.source);
    out << line << '\n';
  }
}

Dataset read_dataset(std::istream& in, const std::string& source) {
  textio::LineReader reader(in, source);
  const auto header = reader.next_fields("header 'h kappa_min kappa_max seed n_samples'");
  if (header.size() != 5) reader.fail("header: expected 5 fields, got " + std::to_string(header.size()));
  Dataset d;
  d.h = reader.to_double(header[0], 1);
  d.kappa_min = reader.to_double(header[1], 2);
  d.kappa_max = reader.to_double(header[2], 3);
  const long long seed = reader.to_int(header[3], 4);
  const long long n = reader.to_int(header[4], 5);
  if (!(d.h > 0.0)) reader.fail("field 1: h must be positive");
  if (seed < 0) reader.fail("field 4: seed must be non-negative");
  if (n < 0) reader.fail("field 5: sample count must be non-negative");
  d.seed = static_cast<std::uint64_t>(seed);

  d.samples.reserve(static_cast<std::size_t>(n));
  for (long long s = 0; s < n; ++s) {
    const auto f = reader.next_fields("sample line");
    if (f.size() != 11) reader.fail("expected 11 fields (9 stencil values, target, source), got " + std::to_string(f.size()));
    Sample smp;
    smp.stencil.h = d.h;
    for (std::size_t k = 0; k < 9; ++k) smp.stencil.values[k] = reader.to_double(f[k], k + 1);
    smp.target = reader.to_double(f[9], 10);
    try {
      smp.source = source_from_string(f[10]);
    } catch (const std::invalid_argument& e) {
      reader.fail(std::string("field 11: ") + e.what());
    }
    d.samples.push_back(smp);
  }
  if (!reader.at_end()) reader.fail("trailing data after " + std::to_string(n) + " samples");
  return d;
}

void save_dataset(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_dataset(out, d);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_dataset(in, path);
}

void save_numerical(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "hk_numerical\n";
  for (const Sample& s : d.samples) out << (std::isnan(s.numerical) ? std::string("nan") : textio::format_double(s.numerical)) << '\n';
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

void load_numerical(Dataset& d, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  textio::LineReader reader(in, path);
  const auto header = reader.next_fields("header 'hk_numerical'");
  if (header.size() != 1 || header[0] != "hk_numerical") reader.fail("expected header 'hk_numerical'");
  for (Sample& s : d.samples) {
    const auto f = reader.next_fields("G_h value");
    if (f.size() != 1) reader.fail("expected one value per line");
    s.numerical = f[0] == "nan" ? std::numeric_limits<double>::quiet_NaN() : reader.to_double(f[0], 1);
  }
  if (!reader.at_end()) reader.fail("more values than samples");
}

}  // namespace hcurv
