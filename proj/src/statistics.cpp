#include "gfanova/statistics.hpp"

#include <algorithm>
#include <set>

namespace gfanova {

int FunctionalDataset::num_groups() const {
  return groups.empty() ? 0 : *std::max_element(groups.begin(), groups.end());
}

std::vector<Index> FunctionalDataset::group_sizes() const {
  return detail::count_groups(groups, num_groups());
}

void FunctionalDataset::validate(Index min_group_size) const {
  if (values.rows() < 1 || values.cols() < 1) throw InvalidInput("dataset needs at least one function and one grid point");
  if (grid.size() != values.cols()) throw InvalidInput("grid length does not match the number of columns");
  for (Index k = 1; k < grid.size(); ++k) {
    if (!(grid(k) > grid(k - 1))) throw InvalidInput("grid must be strictly increasing");
  }
  if (static_cast<Index>(groups.size()) != values.rows()) throw InvalidInput("one group label per function is required");
  for (int g : groups) {
    if (g < 1) throw InvalidInput("group labels must be 1..J");
  }
  const int j = num_groups();
  if (j < 2) throw InvalidInput("at least two groups are required");
  const auto sizes = group_sizes();
  for (int g = 0; g < j; ++g) {
    if (sizes[static_cast<std::size_t>(g)] < std::max<Index>(1, min_group_size)) {
      throw InvalidInput("group " + std::to_string(g + 1) + " has fewer than " +
                         std::to_string(std::max<Index>(1, min_group_size)) + " functions");
    }
  }
  if (!values.allFinite()) throw InvalidInput("function values must be finite");
}

bool FunctionalDataset::operator==(const FunctionalDataset& other) const {
  return values.rows() == other.values.rows() && values.cols() == other.values.cols() && values == other.values &&
         grid.size() == other.grid.size() && grid == other.grid && groups == other.groups &&
         group_names == other.group_names;
}

Vector unit_grid(Index points) {
  return Vector::LinSpaced(points, 1.0, static_cast<double>(points)) / static_cast<double>(points);
}

FunctionalDataset rescale_functions(const FunctionalDataset& ds, Index window) {
  ds.validate(2);
  const int j = ds.num_groups();
  const Index n = ds.size();
  const Index points = ds.grid_size();

  Matrix means, within;
  detail::group_moments(ds.values, ds.groups, j, means, within);
  const auto sizes = ds.group_sizes();

  const Eigen::RowVectorXd overall_mean = ds.values.colwise().mean();
  const Vector overall_var =
      ((ds.values.rowwise() - overall_mean).cwiseAbs2().colwise().sum() / static_cast<double>(n - 1)).transpose();
  const Vector overall_smoothed = moving_average(overall_var, window);

  Matrix scale(j, points);
  for (int g = 0; g < j; ++g) {
    const Vector group_var = within.row(g).transpose() / static_cast<double>(sizes[static_cast<std::size_t>(g)] - 1);
    const Vector smoothed = moving_average(group_var, window);
    for (Index k = 0; k < points; ++k) {
      if (!(smoothed(k) > 0)) {
        throw DegenerateVariance(g + 1, k,
                                 "zero smoothed variance in group " + std::to_string(g + 1) + " at grid index " +
                                     std::to_string(k) + " (r = " + std::to_string(ds.grid(k)) + ")");
      }
      scale(g, k) = std::sqrt(overall_smoothed(k)) / std::sqrt(smoothed(k));
    }
  }

  FunctionalDataset out = ds;
  for (Index i = 0; i < n; ++i) {
    const int g = ds.groups[static_cast<std::size_t>(i)] - 1;
    out.values.row(i) = (ds.values.row(i) - overall_mean).cwiseProduct(scale.row(g)) + overall_mean;
  }
  return out;
}

Vector group_means_vector(const FunctionalDataset& ds) {
  ds.validate();
  return group_means_vector(ds.values, ds.groups, ds.num_groups());
}

Vector group_contrasts_vector(const FunctionalDataset& ds) {
  ds.validate();
  return group_contrasts_vector(ds.values, ds.groups, ds.num_groups());
}

Vector f_statistics(const FunctionalDataset& ds) {
  ds.validate();
  return f_statistics(ds.values, ds.groups, ds.num_groups());
}

Vector welch_f_statistics(const FunctionalDataset& ds) {
  ds.validate(2);
  return welch_f_statistics(ds.values, ds.groups, ds.num_groups());
}

}  // namespace gfanova
