#pragma once

// Pointwise summaries of grouped functions: group means, pairwise contrasts,
// classical and Welch F statistics, variance rescaling and moving-average
// smoothing. The kernels accept any dense Eigen expression whose rows are
// functions; group labels are 1..J.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gfanova/dataset.hpp"
#include "gfanova/types.hpp"

namespace gfanova {

namespace detail {

inline std::vector<Index> count_groups(std::span<const int> groups, int num_groups) {
  std::vector<Index> counts(static_cast<std::size_t>(num_groups), 0);
  for (int g : groups) ++counts[static_cast<std::size_t>(g - 1)];
  return counts;
}

// Per-group means and within-group sums of squares at every grid point. Each
// group is shifted by its first member so identical members give exactly zero
// spread and a constant column gives exactly equal means.
template <typename Derived>
void group_moments(const Eigen::MatrixBase<Derived>& values, std::span<const int> groups, int num_groups,
                   Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>& means,
                   Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>& within) {
  using Scalar = typename Derived::Scalar;
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Index n = values.rows();
  const Index points = values.cols();

  std::vector<Index> first(static_cast<std::size_t>(num_groups), -1);
  std::vector<Index> counts(static_cast<std::size_t>(num_groups), 0);
  for (Index i = 0; i < n; ++i) {
    const auto g = static_cast<std::size_t>(groups[static_cast<std::size_t>(i)] - 1);
    if (first[g] < 0) first[g] = i;
    ++counts[g];
  }

  Dense shift(num_groups, points);
  for (int g = 0; g < num_groups; ++g) shift.row(g) = values.row(first[static_cast<std::size_t>(g)]);

  Dense offsets = Dense::Zero(num_groups, points);
  for (Index i = 0; i < n; ++i) {
    const int g = groups[static_cast<std::size_t>(i)] - 1;
    offsets.row(g) += values.row(i) - shift.row(g);
  }
  for (int g = 0; g < num_groups; ++g) offsets.row(g) /= static_cast<Scalar>(counts[static_cast<std::size_t>(g)]);
  means = shift + offsets;

  within = Dense::Zero(num_groups, points);
  for (Index i = 0; i < n; ++i) {
    const int g = groups[static_cast<std::size_t>(i)] - 1;
    within.row(g) += (values.row(i) - shift.row(g) - offsets.row(g)).cwiseAbs2();
  }
}

}  // namespace detail

// J x K matrix of group-mean curves.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> group_means(
    const Eigen::MatrixBase<Derived>& values, std::span<const int> groups, int num_groups) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> sums =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(num_groups, values.cols());
  for (Index i = 0; i < values.rows(); ++i) sums.row(groups[static_cast<std::size_t>(i)] - 1) += values.row(i);
  const auto counts = detail::count_groups(groups, num_groups);
  for (int g = 0; g < num_groups; ++g) sums.row(g) /= static_cast<Scalar>(counts[static_cast<std::size_t>(g)]);
  return sums;
}

// Group means concatenated in ascending group order: coordinate (j-1)*K + k.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> group_means_vector(
    const Eigen::MatrixBase<Derived>& values, std::span<const int> groups, int num_groups) {
  const auto means = group_means(values, groups, num_groups);
  const Index points = values.cols();
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> out(num_groups * points);
  for (int g = 0; g < num_groups; ++g) out.segment(g * points, points) = means.row(g).transpose();
  return out;
}

// Differences mean_a - mean_b for pairs (1,2),(1,3),...,(J-1,J), each a block of K.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> group_contrasts_vector(
    const Eigen::MatrixBase<Derived>& values, std::span<const int> groups, int num_groups) {
  const auto means = group_means(values, groups, num_groups);
  const Index points = values.cols();
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> out(num_groups * (num_groups - 1) / 2 * points);
  Index block = 0;
  for (int a = 0; a < num_groups; ++a) {
    for (int b = a + 1; b < num_groups; ++b, ++block) {
      out.segment(block * points, points) = (means.row(a) - means.row(b)).transpose();
    }
  }
  return out;
}

// Classical one-way F at every grid point; 0/0 -> 0 and positive/0 -> +inf.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> f_statistics(const Eigen::MatrixBase<Derived>& values,
                                                                        std::span<const int> groups,
                                                                        int num_groups) {
  using Scalar = typename Derived::Scalar;
  const Index n = values.rows();
  if (n <= num_groups) throw InvalidInput("F statistics need more functions than groups");

  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> means, within;
  detail::group_moments(values, groups, num_groups, means, within);
  const auto counts = detail::count_groups(groups, num_groups);

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(values.cols());
  for (Index k = 0; k < values.cols(); ++k) {
    Scalar grand = 0;
    for (int g = 0; g < num_groups; ++g) grand += static_cast<Scalar>(counts[static_cast<std::size_t>(g)]) * means(g, k);
    grand /= static_cast<Scalar>(n);
    Scalar between = 0;
    for (int g = 0; g < num_groups; ++g) {
      const Scalar dev = means(g, k) - grand;
      between += static_cast<Scalar>(counts[static_cast<std::size_t>(g)]) * dev * dev;
    }
    // exact equality of all means must give exactly zero between-group spread
    if ((means.col(k).array() == means(0, k)).all()) between = 0;
    const Scalar wss = within.col(k).sum();
    if (wss == 0) {
      out(k) = between == 0 ? Scalar(0) : std::numeric_limits<Scalar>::infinity();
    } else {
      out(k) = (between / static_cast<Scalar>(num_groups - 1)) / (wss / static_cast<Scalar>(n - num_groups));
    }
  }
  return out;
}

// Welch's heteroscedastic one-way statistic at every grid point. A column on
// which every function takes the same value yields 0; any other zero group
// variance raises DegenerateVariance.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> welch_f_statistics(
    const Eigen::MatrixBase<Derived>& values, std::span<const int> groups, int num_groups) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> means, within;
  detail::group_moments(values, groups, num_groups, means, within);
  const auto counts = detail::count_groups(groups, num_groups);
  for (int g = 0; g < num_groups; ++g) {
    if (counts[static_cast<std::size_t>(g)] < 2) throw InvalidInput("Welch statistic needs n_j >= 2 in every group");
  }

  const auto groups_s = static_cast<Scalar>(num_groups);
  const Scalar correction_factor = 2 * (groups_s - 2) / (groups_s * groups_s - 1);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(values.cols());
  for (Index k = 0; k < values.cols(); ++k) {
    const bool equal_means = (means.col(k).array() == means(0, k)).all();
    if (equal_means && (within.col(k).array() == 0).all()) {
      out(k) = 0;
      continue;
    }
    Scalar weight_sum = 0;
    Scalar weighted_mean = 0;
    std::vector<Scalar> weights(static_cast<std::size_t>(num_groups));
    for (int g = 0; g < num_groups; ++g) {
      const auto nj = static_cast<Scalar>(counts[static_cast<std::size_t>(g)]);
      const Scalar variance = within(g, k) / (nj - 1);
      if (variance == 0) {
        throw DegenerateVariance(g + 1, k,
                                 "zero variance in group " + std::to_string(g + 1) + " at grid index " +
                                     std::to_string(k));
      }
      weights[static_cast<std::size_t>(g)] = nj / variance;
      weight_sum += weights[static_cast<std::size_t>(g)];
      weighted_mean += weights[static_cast<std::size_t>(g)] * means(g, k);
    }
    weighted_mean /= weight_sum;
    Scalar numerator = 0;
    Scalar spread = 0;
    for (int g = 0; g < num_groups; ++g) {
      const Scalar w = weights[static_cast<std::size_t>(g)];
      const Scalar dev = means(g, k) - weighted_mean;
      numerator += w * dev * dev;
      const Scalar share = 1 - w / weight_sum;
      spread += share * share / static_cast<Scalar>(counts[static_cast<std::size_t>(g)] - 1);
    }
    if (equal_means) numerator = 0;
    out(k) = (numerator / (groups_s - 1)) / (1 + correction_factor * spread);
  }
  return out;
}

// Centered moving average with window b (odd), shrunk at the boundaries.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> moving_average(const Eigen::MatrixBase<Derived>& series,
                                                                          Index window) {
  using Scalar = typename Derived::Scalar;
  if (window < 1 || window % 2 == 0) throw InvalidInput("moving-average window must be a positive odd integer");
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> input = series.derived().reshaped();
  const Index n = input.size();
  const Index half = (window - 1) / 2;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(n);
  for (Index k = 0; k < n; ++k) {
    const Index lo = std::max<Index>(0, k - half);
    const Index hi = std::min<Index>(n - 1, k + half);
    out(k) = input.segment(lo, hi - lo + 1).sum() / static_cast<Scalar>(hi - lo + 1);
  }
  return out;
}

// Equalizes group variances pointwise while keeping the overall mean and
// variance; variances are unbiased and MA-smoothed with window b (b = 1: none).
FunctionalDataset rescale_functions(const FunctionalDataset& ds, Index window = 1);

// Stabilizes functions whose variance behaves like 1/m_i (m_i > 0).
template <typename Derived, typename CountDerived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> scale_summary_functions(
    const Eigen::MatrixBase<Derived>& fns, const Eigen::MatrixBase<CountDerived>& counts) {
  using Scalar = typename Derived::Scalar;
  const Index n = fns.rows();
  if (counts.size() != n) throw InvalidInput("one count per function is required");
  if (n == 0) throw InvalidInput("no functions to scale");
  const Eigen::Matrix<typename CountDerived::Scalar, Eigen::Dynamic, 1> m_values = counts.derived().reshaped();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> spread(n);
  for (Index i = 0; i < n; ++i) {
    const Scalar m = static_cast<Scalar>(m_values(i));
    if (!(m > 0) || !std::isfinite(m)) throw InvalidInput("counts must be positive, got one at function " + std::to_string(i));
    spread(i) = std::sqrt(Scalar(1) / m);
  }
  const Scalar tau = spread.sum() / static_cast<Scalar>(n);
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> mean = fns.colwise().mean();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(n, fns.cols());
  for (Index i = 0; i < n; ++i) out.row(i) = (fns.row(i) - mean) / spread(i) * tau + mean;
  return out;
}

// Dataset conveniences.
Vector group_means_vector(const FunctionalDataset& ds);
Vector group_contrasts_vector(const FunctionalDataset& ds);
Vector f_statistics(const FunctionalDataset& ds);
Vector welch_f_statistics(const FunctionalDataset& ds);

}  // namespace gfanova
