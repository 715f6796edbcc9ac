#include "gfanova/fanova.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "gfanova/parallel.hpp"
#include "gfanova/statistics.hpp"

namespace gfanova {

namespace {

constexpr std::uint64_t kPermutationTag = 0x7065726d;  // "perm"

std::uint64_t factorial_capped(Index n, std::uint64_t cap) {
  std::uint64_t value = 1;
  for (Index i = 2; i <= n; ++i) {
    if (value > cap / static_cast<std::uint64_t>(i)) return cap + 1;
    value *= static_cast<std::uint64_t>(i);
  }
  return value;
}

Index min_group_size_for(StatisticKind kind) {
  return (is_scaled(kind) || kind == StatisticKind::FstatCorrected) ? 2 : 1;
}

}  // namespace

const char* to_string(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::Means:
      return "means";
    case StatisticKind::Contrasts:
      return "contrasts";
    case StatisticKind::MeansScaled:
      return "means-scaled";
    case StatisticKind::ContrastsScaled:
      return "contrasts-scaled";
    case StatisticKind::Fstat:
      return "f";
    case StatisticKind::FstatCorrected:
      return "f-welch";
  }
  return "unknown";
}

std::optional<StatisticKind> parse_statistic_kind(const std::string& name) {
  for (auto kind : {StatisticKind::Means, StatisticKind::Contrasts, StatisticKind::MeansScaled,
                    StatisticKind::ContrastsScaled, StatisticKind::Fstat, StatisticKind::FstatCorrected}) {
    if (name == to_string(kind)) return kind;
  }
  return std::nullopt;
}

Sidedness sidedness_for(StatisticKind kind) {
  return is_f_kind(kind) ? Sidedness::UpperExtreme : Sidedness::TwoSided;
}

bool is_scaled(StatisticKind kind) {
  return kind == StatisticKind::MeansScaled || kind == StatisticKind::ContrastsScaled;
}

bool is_f_kind(StatisticKind kind) {
  return kind == StatisticKind::Fstat || kind == StatisticKind::FstatCorrected;
}

void AnovaConfig::validate() const {
  if (nperm < 1) throw InvalidInput("nperm must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in (0, 1)");
  if (ma_window < 1 || ma_window % 2 == 0) throw InvalidInput("ma_window must be a positive odd integer");
}

std::vector<int> permute_group_labels(std::span<const int> groups, std::mt19937_64& stream) {
  std::vector<int> out(groups.begin(), groups.end());
  for (std::size_t i = out.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(out[i - 1], out[pick(stream)]);
  }
  return out;
}

Vector statistic_vector(const Matrix& values, std::span<const int> groups, int num_groups, StatisticKind kind) {
  switch (kind) {
    case StatisticKind::Means:
    case StatisticKind::MeansScaled:
      return group_means_vector(values, groups, num_groups);
    case StatisticKind::Contrasts:
    case StatisticKind::ContrastsScaled:
      return group_contrasts_vector(values, groups, num_groups);
    case StatisticKind::Fstat:
      return f_statistics(values, groups, num_groups);
    case StatisticKind::FstatCorrected:
      return welch_f_statistics(values, groups, num_groups);
  }
  throw InvalidInput("unknown statistic kind");
}

Index test_vector_length(StatisticKind kind, int num_groups, Index grid_size) {
  switch (kind) {
    case StatisticKind::Means:
    case StatisticKind::MeansScaled:
      return num_groups * grid_size;
    case StatisticKind::Contrasts:
    case StatisticKind::ContrastsScaled:
      return num_groups * (num_groups - 1) / 2 * grid_size;
    case StatisticKind::Fstat:
    case StatisticKind::FstatCorrected:
      return grid_size;
  }
  return 0;
}

std::vector<CoordinateLabel> coordinate_labels(StatisticKind kind, int num_groups, const Vector& grid) {
  std::vector<CoordinateLabel> labels;
  labels.reserve(static_cast<std::size_t>(test_vector_length(kind, num_groups, grid.size())));
  auto add_block = [&](int first, int second) {
    for (Index k = 0; k < grid.size(); ++k) labels.push_back({first, second, k, grid(k)});
  };
  if (is_f_kind(kind)) {
    add_block(0, 0);
  } else if (kind == StatisticKind::Means || kind == StatisticKind::MeansScaled) {
    for (int g = 1; g <= num_groups; ++g) add_block(g, 0);
  } else {
    for (int a = 1; a <= num_groups; ++a) {
      for (int b = a + 1; b <= num_groups; ++b) add_block(a, b);
    }
  }
  return labels;
}

FunctionalDataset prepare_for_permutation(const FunctionalDataset& ds, const AnovaConfig& cfg) {
  cfg.validate();
  ds.validate(min_group_size_for(cfg.kind));
  if (is_f_kind(cfg.kind) && ds.size() <= ds.num_groups()) {
    throw InvalidInput("F statistics need more functions than groups");
  }
  if (is_scaled(cfg.kind)) return rescale_functions(ds, cfg.ma_window);
  return ds;
}

TestVectorEnsemble build_ensemble(const FunctionalDataset& ds, const AnovaConfig& cfg) {
  const FunctionalDataset prepared = prepare_for_permutation(ds, cfg);
  const int j = prepared.num_groups();
  const Index d = test_vector_length(cfg.kind, j, prepared.grid_size());

  const std::uint64_t total = cfg.exhaustive_cap > 0 ? factorial_capped(prepared.size(), cfg.exhaustive_cap) : 0;
  const bool exhaustive = cfg.exhaustive_cap > 0 && total <= cfg.exhaustive_cap;

  if (exhaustive) {
    // identity first, then every other ordering in lexicographic order
    std::vector<std::vector<int>> labelings;
    labelings.reserve(static_cast<std::size_t>(total));
    std::vector<std::size_t> perm(static_cast<std::size_t>(prepared.size()));
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    do {
      std::vector<int> labels(perm.size());
      for (std::size_t i = 0; i < perm.size(); ++i) labels[i] = prepared.groups[perm[i]];
      labelings.push_back(std::move(labels));
    } while (std::next_permutation(perm.begin(), perm.end()));

    Matrix values(static_cast<Index>(labelings.size()), d);
    parallel_for(
        values.rows(),
        [&](Index r) {
          values.row(r) = statistic_vector(prepared.values, labelings[static_cast<std::size_t>(r)], j, cfg.kind);
        },
        cfg.threads);
    return TestVectorEnsemble(std::move(values));
  }

  Matrix values(cfg.nperm + 1, d);
  parallel_for(
      cfg.nperm + 1,
      [&](Index r) {
        if (r == 0) {
          values.row(0) = statistic_vector(prepared.values, prepared.groups, j, cfg.kind);
          return;
        }
        auto stream = derived_stream(cfg.seed, static_cast<std::uint64_t>(r), kPermutationTag);
        const auto labels = permute_group_labels(prepared.groups, stream);
        values.row(r) = statistic_vector(prepared.values, labels, j, cfg.kind);
      },
      cfg.threads);
  return TestVectorEnsemble(std::move(values));
}

AnovaResult evaluate_ensemble(const TestVectorEnsemble& ensemble, StatisticKind kind, double alpha,
                              std::vector<CoordinateLabel> labels, unsigned threads) {
  if (static_cast<Index>(labels.size()) != ensemble.dimension()) {
    throw InvalidInput("coordinate labels do not cover the test vector");
  }
  AnovaResult result;
  result.kind = kind;
  result.ensemble_size = ensemble.size();
  const Sidedness sided = sidedness_for(kind);

  const RankMatrix ranks = compute_pointwise_ranks(ensemble, sided, threads);
  const ErlMeasures erl = compute_erl_measures(ranks);
  result.pvalues = compute_p_values(ranks, erl);
  result.envelope = erl_envelope(ensemble, erl, alpha, sided);
  result.observed = ensemble.observed().transpose();
  result.verdict = envelope_verdict(result.envelope, result.observed);
  result.coordinate_labels = std::move(labels);
  result.reject = result.pvalues.p_erl <= alpha;

  if (level_unreachable(ensemble.size(), alpha)) {
    std::ostringstream msg;
    msg << "alpha * s = " << alpha * static_cast<double>(ensemble.size())
        << " < 1: the test cannot reject; use more permutations (some thousands at minimum)";
    result.warnings.push_back(msg.str());
  }
  if (result.verdict.reject != result.reject) {
    // only reachable with pointwise ties between the observed and replicate vectors
    result.warnings.push_back("pointwise ties: envelope verdict disagrees with p_erl; the reject flag follows p_erl");
  }
  return result;
}

AnovaResult run_anova(const FunctionalDataset& ds, const AnovaConfig& cfg) {
  const TestVectorEnsemble ensemble = build_ensemble(ds, cfg);
  return evaluate_ensemble(ensemble, cfg.kind, cfg.alpha, coordinate_labels(cfg.kind, ds.num_groups(), ds.grid),
                           cfg.threads == 0 ? default_thread_count() : cfg.threads);
}

double fmax_p_value(const TestVectorEnsemble& f_ensemble) {
  const Vector maxima = f_ensemble.values().rowwise().maxCoeff();
  const Index at_least = (maxima.array() >= maxima(0)).count();
  return static_cast<double>(at_least) / static_cast<double>(f_ensemble.size());
}

double baseline_fmax(const FunctionalDataset& ds, const AnovaConfig& cfg) {
  AnovaConfig f_cfg = cfg;
  f_cfg.kind = StatisticKind::Fstat;
  return fmax_p_value(build_ensemble(ds, f_cfg));
}

double baseline_pmin(const AnovaResult& f_result) {
  if (!is_f_kind(f_result.kind)) throw InvalidInput("p-min needs a pointwise-F result");
  return f_result.pvalues.p_plus;
}

}  // namespace gfanova
