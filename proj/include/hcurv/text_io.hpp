#pragma once

// Helpers shared by the text file formats. Doubles are written with 17
// significant digits, which round-trips every binary64 value exactly.

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace hcurv::textio {

std::string format_double(double v);
void append_double(std::string& out, double v);

/// Line reader that reports "source:line: field N: ..." on parse failures.
class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  /// Next non-empty line split on whitespace; throws ParseError at end of input.
  std::vector<std::string> next_fields(std::string_view expecting);
  bool at_end();

  double to_double(const std::string& token, std::size_t field) const;
  long long to_int(const std::string& token, std::size_t field) const;
  [[noreturn]] void fail(const std::string& message) const;

  std::size_t line_number() const { return line_; }
  const std::string& source() const { return source_; }

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_ = 0;
};

}  // namespace hcurv::textio
