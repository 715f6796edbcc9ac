#include "gfanova/rankcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "gfanova/parallel.hpp"

namespace gfanova {

namespace {

void check_rankable(const Eigen::Ref<const Matrix>& values) {
  for (Index k = 0; k < values.cols(); ++k) {
    for (Index i = 0; i < values.rows(); ++i) {
      const double v = values(i, k);
      if (std::isnan(v) || v == -std::numeric_limits<double>::infinity()) {
        throw InvalidInput("non-finite ensemble value at row " + std::to_string(i) + ", column " +
                           std::to_string(k));
      }
    }
  }
}

// Doubled tie-averaged raw ranks of one column, transformed per sidedness.
void rank_column(const Eigen::Ref<const Matrix>& values, Index col, Sidedness sided,
                 std::vector<std::int32_t>& order, RankStorage& out) {
  const auto s = static_cast<std::int32_t>(values.rows());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::int32_t a, std::int32_t b) { return values(a, col) < values(b, col); });

  const std::int32_t mirror = 2 * (s + 1);
  std::int32_t start = 0;
  while (start < s) {
    std::int32_t stop = start + 1;
    const double v = values(order[start], col);
    while (stop < s && values(order[stop], col) == v) ++stop;
    // positions start+1 .. stop (1-based) share the averaged rank
    const std::int32_t raw = (start + 1) + stop;
    std::int32_t rank = raw;
    switch (sided) {
      case Sidedness::LowerExtreme:
        break;
      case Sidedness::UpperExtreme:
        rank = mirror - raw;
        break;
      case Sidedness::TwoSided:
        rank = std::min(raw, mirror - raw);
        break;
    }
    for (std::int32_t p = start; p < stop; ++p) out(order[p], col) = rank;
    start = stop;
  }
}

bool lex_less(const std::int32_t* a, const std::int32_t* b, Index d) {
  for (Index k = 0; k < d; ++k) {
    if (a[k] != b[k]) return a[k] < b[k];
  }
  return false;
}

}  // namespace

TestVectorEnsemble::TestVectorEnsemble(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 2 || values_.cols() < 1) {
    throw InvalidInput("ensemble needs at least 2 rows and 1 column");
  }
  check_rankable(values_);
}

Vector ErlMeasures::measures() const {
  Vector out(size());
  for (Index i = 0; i < size(); ++i) out(i) = measure(i);
  return out;
}

RankMatrix compute_pointwise_ranks(const Eigen::Ref<const Matrix>& values, Sidedness sided,
                                   unsigned threads) {
  if (values.rows() < 1 || values.cols() < 1) throw InvalidInput("empty ensemble");
  check_rankable(values);

  RankStorage doubled(values.rows(), values.cols());
  const auto s = static_cast<std::size_t>(values.rows());
  if (threads == 1) {
    std::vector<std::int32_t> order(s);
    for (Index k = 0; k < values.cols(); ++k) rank_column(values, k, sided, order, doubled);
  } else {
    // columns are disjoint, so the result matches the sequential loop
    parallel_for(
        values.cols(),
        [&](Index k) {
          std::vector<std::int32_t> order(s);
          rank_column(values, k, sided, order, doubled);
        },
        threads);
  }
  return RankMatrix(std::move(doubled), sided);
}

Vector compute_extreme_ranks(const RankMatrix& ranks) {
  return ranks.doubled().rowwise().minCoeff().cast<double>() * 0.5;
}

bool erl_precedes(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidInput("rank vectors differ in length");
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool erl_precedes(std::span<const std::int32_t> a, std::span<const std::int32_t> b) {
  if (a.size() != b.size()) throw InvalidInput("rank vectors differ in length");
  return lex_less(a.data(), b.data(), static_cast<Index>(a.size()));
}

ErlMeasures compute_erl_measures(const RankMatrix& ranks) {
  const Index s = ranks.size();
  const Index d = ranks.dimension();

  SortedRankRows sorted = ranks.doubled();
  for (Index i = 0; i < s; ++i) {
    std::int32_t* row = sorted.data() + i * d;
    std::sort(row, row + d);
  }

  std::vector<Index> order(static_cast<std::size_t>(s));
  std::iota(order.begin(), order.end(), Index{0});
  const std::int32_t* base = sorted.data();
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return lex_less(base + a * d, base + b * d, d); });

  // rows in one run of equal vectors share the count of rows before the run
  std::vector<Index> preceding(static_cast<std::size_t>(s));
  std::size_t run_start = 0;
  for (std::size_t p = 0; p < order.size(); ++p) {
    if (p > 0 && lex_less(base + order[p - 1] * d, base + order[p] * d, d)) run_start = p;
    preceding[static_cast<std::size_t>(order[p])] = static_cast<Index>(run_start);
  }
  return ErlMeasures(std::move(preceding), std::move(sorted));
}

PValueTriple compute_p_values(const RankMatrix& ranks, const ErlMeasures& erl,
                              std::optional<TieBreak> tie_break) {
  const Index s = ranks.size();
  if (erl.size() != s) throw InvalidInput("ERL measures do not match the rank matrix");

  const auto extreme = ranks.doubled().rowwise().minCoeff().eval();
  const std::int32_t observed = extreme(0);
  Index at_most = 0;
  Index below = 0;
  for (Index i = 0; i < s; ++i) {
    at_most += extreme(i) <= observed;
    below += extreme(i) < observed;
  }

  // equal preceding counts identify rows whose sorted rank vectors are equal
  const Index before = erl.preceding(0);
  Index ties = 0;
  for (Index i = 0; i < s; ++i) ties += erl.preceding(i) == before;

  Index not_after = before + ties;
  if (tie_break) {
    auto stream = derived_stream(tie_break->seed, 0, 0x7469652d627265ULL);
    std::uniform_int_distribution<Index> position(1, ties);
    not_after = before + position(stream);
  }

  const auto total = static_cast<double>(s);
  return PValueTriple{static_cast<double>(below) / total, static_cast<double>(not_after) / total,
                      static_cast<double>(at_most) / total};
}

}  // namespace gfanova
