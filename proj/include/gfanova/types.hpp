#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gfanova {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr const char* kVersion = "gfanova 0.1.0";

// Direction in which a coordinate value counts as extreme.
enum class Sidedness {
  TwoSided,
  LowerExtreme,  // small values are extreme
  UpperExtreme,  // large values are extreme
};

const char* to_string(Sidedness sided);

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A group variance (raw or smoothed) vanished where a division by it is needed.
class DegenerateVariance : public std::runtime_error {
 public:
  DegenerateVariance(int group, Index grid_index, const std::string& what)
      : std::runtime_error(what), group_(group), grid_index_(grid_index) {}

  // 1-based group label, 0 when the failure is not tied to one group.
  int group() const noexcept { return group_; }
  Index grid_index() const noexcept { return grid_index_; }

 private:
  int group_;
  Index grid_index_;
};

}  // namespace gfanova
