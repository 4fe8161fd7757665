#include <fstream>
#include <ostream>

#include "hcurv/errors.hpp"
#include "hcurv/grid_levelset.hpp"
#include "hcurv/text_io.hpp"

namespace hcurv {

void write_field(std::ostream& out, const LevelSetField& field) {
  const Grid& g = field.grid();
  std::string line = std::to_string(g.nx()) + " " + std::to_string(g.ny()) + " ";
  textio::append_double(line, g.x_lo());
  line += ' ';
  textio::append_double(line, g.y_lo());
  line += ' ';
  textio::append_double(line, g.h());
  out << line << '\n';
  for (int j = 0; j < g.ny(); ++j) {
    line.clear();
    for (int i = 0; i < g.nx(); ++i) {
      if (i) line += ' ';
      textio::append_double(line, field(i, j));
    }
    out << line << '\n';
  }
}

LevelSetField read_field(std::istream& in, const std::string& source) {
  textio::LineReader reader(in, source);
  const auto header = reader.next_fields("header 'nx ny x_lo y_lo h'");
  if (header.size() != 5) reader.fail("header: expected 5 fields, got " + std::to_string(header.size()));
  const auto nx = reader.to_int(header[0], 1);
  const auto ny = reader.to_int(header[1], 2);
  const double x_lo = reader.to_double(header[2], 3);
  const double y_lo = reader.to_double(header[3], 4);
  const double h = reader.to_double(header[4], 5);
  if (nx < 5 || ny < 5 || h <= 0.0) reader.fail("header: invalid grid dimensions");
  Grid grid(static_cast<int>(nx), static_cast<int>(ny), x_lo, y_lo, h);

  std::vector<double> phi;
  phi.reserve(grid.size());
  while (phi.size() < grid.size()) {
    const auto fields = reader.next_fields("level-set values");
    for (std::size_t f = 0; f < fields.size(); ++f) {
      if (phi.size() == grid.size()) reader.fail("too many values");
      phi.push_back(reader.to_double(fields[f], f + 1));
    }
  }
  if (!reader.at_end()) reader.fail("trailing data after " + std::to_string(grid.size()) + " values");
  return LevelSetField(grid, std::move(phi));
}

void save_field(const LevelSetField& field, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_field(out, field);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

LevelSetField load_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_field(in, path);
}

}  // namespace hcurv
