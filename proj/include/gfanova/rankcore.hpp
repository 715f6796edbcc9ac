#pragma once

// Pointwise ranking of a test-vector ensemble and the extreme rank length
// (ERL) ordering built on top of it.
//
// Row 0 of every ensemble is the observed vector; rows 1..s-1 are the
// permutation replicates. Ranks are kept as integers holding twice the
// tie-averaged rank, so half ranks from ties are represented exactly.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gfanova/types.hpp"

namespace gfanova {

using RankStorage = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic>;
using SortedRankRows = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// s x d statistic values; row 0 is the observed vector. Entries are finite
// except for +inf, which F ensembles produce at zero-denominator points.
class TestVectorEnsemble {
 public:
  TestVectorEnsemble() = default;
  explicit TestVectorEnsemble(Matrix values);

  const Matrix& values() const noexcept { return values_; }
  Index size() const noexcept { return values_.rows(); }
  Index dimension() const noexcept { return values_.cols(); }
  auto observed() const { return values_.row(0); }

 private:
  Matrix values_;
};

class RankMatrix {
 public:
  RankMatrix(RankStorage doubled, Sidedness sided) : doubled_(std::move(doubled)), sided_(sided) {}

  Index size() const noexcept { return doubled_.rows(); }
  Index dimension() const noexcept { return doubled_.cols(); }
  Sidedness sidedness() const noexcept { return sided_; }

  double rank(Index row, Index col) const { return 0.5 * doubled_(row, col); }
  const RankStorage& doubled() const noexcept { return doubled_; }

 private:
  RankStorage doubled_;
  Sidedness sided_;
};

class ErlMeasures {
 public:
  ErlMeasures(std::vector<Index> preceding, SortedRankRows sorted_rows)
      : preceding_(std::move(preceding)), sorted_rows_(std::move(sorted_rows)) {}

  Index size() const noexcept { return static_cast<Index>(preceding_.size()); }

  // Number of rows that strictly precede row i under the ERL ordering.
  Index preceding(Index i) const { return preceding_[static_cast<std::size_t>(i)]; }
  const std::vector<Index>& preceding_counts() const noexcept { return preceding_; }

  double measure(Index i) const { return static_cast<double>(preceding(i)) / static_cast<double>(size()); }
  Vector measures() const;

  // Row i's pointwise ranks sorted ascending, doubled.
  std::span<const std::int32_t> sorted_row(Index i) const {
    return {sorted_rows_.data() + i * sorted_rows_.cols(), static_cast<std::size_t>(sorted_rows_.cols())};
  }
  const SortedRankRows& sorted_rows() const noexcept { return sorted_rows_; }

 private:
  std::vector<Index> preceding_;
  SortedRankRows sorted_rows_;
};

struct PValueTriple {
  double p_minus = 0.0;
  double p_erl = 1.0;
  double p_plus = 1.0;
};

// Optional seeded randomization of ERL ties between the observed row and
// replicates. Off by default, which keeps p_erl conservative.
struct TieBreak {
  std::uint64_t seed = 0;
};

RankMatrix compute_pointwise_ranks(const Eigen::Ref<const Matrix>& values, Sidedness sided,
                                   unsigned threads = 1);
inline RankMatrix compute_pointwise_ranks(const TestVectorEnsemble& ensemble, Sidedness sided,
                                          unsigned threads = 1) {
  return compute_pointwise_ranks(ensemble.values(), sided, threads);
}

// Minimum pointwise rank of every row.
Vector compute_extreme_ranks(const RankMatrix& ranks);

// Strict lexicographic precedence of two ascending rank vectors.
bool erl_precedes(std::span<const double> a, std::span<const double> b);
bool erl_precedes(std::span<const std::int32_t> a, std::span<const std::int32_t> b);

ErlMeasures compute_erl_measures(const RankMatrix& ranks);

PValueTriple compute_p_values(const RankMatrix& ranks, const ErlMeasures& erl,
                              std::optional<TieBreak> tie_break = std::nullopt);

}  // namespace gfanova
