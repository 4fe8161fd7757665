#include "hcurv/text_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "hcurv/errors.hpp"

namespace hcurv::textio {

std::string format_double(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

void append_double(std::string& out, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.append(buf, static_cast<std::size_t>(n));
}

std::vector<std::string> LineReader::next_fields(std::string_view expecting) {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_;
    std::istringstream ss(line);
    std::vector<std::string> fields;
    std::string tok;
    while (ss >> tok) fields.push_back(tok);
    if (!fields.empty()) return fields;
  }
  throw ParseError(source_ + ":" + std::to_string(line_ + 1) + ": unexpected end of file, expected " +
                   std::string(expecting));
}

bool LineReader::at_end() {
  while (true) {
    const int c = in_.peek();
    if (c == std::char_traits<char>::eof()) return true;
    if (c == '\n') {
      in_.get();
      ++line_;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      in_.get();
      continue;
    }
    return false;
  }
}

double LineReader::to_double(const std::string& token, std::size_t field) const {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v))
    fail("field " + std::to_string(field) + ": expected a finite number, got '" + token + "'");
  return v;
}

long long LineReader::to_int(const std::string& token, std::size_t field) const {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(token.c_str(), &end, 10);
  if (end == token.c_str() || *end != '\0' || errno == ERANGE)
    fail("field " + std::to_string(field) + ": expected an integer, got '" + token + "'");
  return v;
}

void LineReader::fail(const std::string& message) const {
  throw ParseError(source_ + ":" + std::to_string(line_) + ": " + message);
}

}  // namespace hcurv::textio
