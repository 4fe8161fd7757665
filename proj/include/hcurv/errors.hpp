#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hcurv {

/// Gradient magnitude below `kGradientEpsilon` at a node that needs a normal.
class DegenerateGradient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Root finding gave up; carries the last bracket so callers can inspect it.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double lo, double hi)
      : std::runtime_error(what), bracket_lo(lo), bracket_hi(hi) {}

  double bracket_lo;
  double bracket_hi;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RankDeficiency : public std::runtime_error {
 public:
  RankDeficiency(const std::string& what, std::size_t component)
      : std::runtime_error(what), component(component) {}

  std::size_t component;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, int epoch, std::size_t batch)
      : std::runtime_error(what), epoch(epoch), batch(batch) {}

  int epoch;
  std::size_t batch;
};

}  // namespace hcurv
