#pragma once

#include <string>
#include <vector>

#include "gfanova/types.hpp"

namespace gfanova {

// N functions discretized on a shared grid, each carrying a group label in 1..J.
struct FunctionalDataset {
  Matrix values;                         // N x K, one function per row
  Vector grid;                           // K strictly increasing points
  std::vector<int> groups;               // length N, labels 1..J
  std::vector<std::string> group_names;  // optional display names, index j-1

  Index size() const noexcept { return values.rows(); }
  Index grid_size() const noexcept { return values.cols(); }
  int num_groups() const;
  std::vector<Index> group_sizes() const;

  // Throws InvalidInput unless every structural invariant holds. With
  // min_group_size = 2 it additionally requires n_j >= 2 for all groups.
  void validate(Index min_group_size = 1) const;

  bool operator==(const FunctionalDataset& other) const;
};

// Evenly spaced grid r_k = (k + 1) / K on (0, 1].
Vector unit_grid(Index points);

}  // namespace gfanova
