#pragma once

// One-way graphical functional ANOVA: permutation ensembles of a chosen test
// vector followed by the ERL global envelope test.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gfanova/dataset.hpp"
#include "gfanova/envelope.hpp"
#include "gfanova/rankcore.hpp"

namespace gfanova {

enum class StatisticKind {
  Means,            // group-mean curves
  Contrasts,        // pairwise differences of group means
  MeansScaled,      // group means of variance-rescaled functions
  ContrastsScaled,  // contrasts of variance-rescaled functions
  Fstat,            // pointwise classical F
  FstatCorrected,   // pointwise Welch F
};

const char* to_string(StatisticKind kind);
std::optional<StatisticKind> parse_statistic_kind(const std::string& name);

// F kinds are tested one-sided (large is extreme); the rest two-sided.
Sidedness sidedness_for(StatisticKind kind);
bool is_scaled(StatisticKind kind);
bool is_f_kind(StatisticKind kind);

struct AnovaConfig {
  Index nperm = 1999;  // simulated replicates, s = nperm + 1
  double alpha = 0.05;
  std::uint64_t seed = 0;
  StatisticKind kind = StatisticKind::Means;
  Index ma_window = 1;
  // Use every label permutation instead of random draws when N! <= this cap
  // (0 disables enumeration). Enumeration ignores nperm and seed.
  std::uint64_t exhaustive_cap = 0;
  unsigned threads = 0;  // 0: default_thread_count()

  void validate() const;
};

// What coordinate k of the test vector refers to. Groups are 1-based; 0
// marks an unused slot (second is 0 for Means kinds, both are 0 for F kinds).
struct CoordinateLabel {
  int first = 0;
  int second = 0;
  Index grid_index = 0;
  double grid_value = 0.0;

  bool operator==(const CoordinateLabel&) const = default;
};

struct AnovaResult {
  StatisticKind kind = StatisticKind::Means;
  Index ensemble_size = 0;  // s
  PValueTriple pvalues;
  GlobalEnvelope envelope;
  Vector observed;
  std::vector<CoordinateLabel> coordinate_labels;
  EnvelopeVerdict verdict;
  bool reject = false;  // always p_erl <= alpha
  std::vector<std::string> warnings;
};

// Uniformly random reordering of the label vector (Fisher-Yates).
std::vector<int> permute_group_labels(std::span<const int> groups, std::mt19937_64& stream);

// Test vector of one kind for one labeling of already prepared values.
Vector statistic_vector(const Matrix& values, std::span<const int> groups, int num_groups, StatisticKind kind);

Index test_vector_length(StatisticKind kind, int num_groups, Index grid_size);
std::vector<CoordinateLabel> coordinate_labels(StatisticKind kind, int num_groups, const Vector& grid);

// Values the permutations act on: rescaled once for scaled kinds, unchanged otherwise.
FunctionalDataset prepare_for_permutation(const FunctionalDataset& ds, const AnovaConfig& cfg);

// Row 0: observed labeling; row r: labeling drawn from derived_stream(seed, r).
TestVectorEnsemble build_ensemble(const FunctionalDataset& ds, const AnovaConfig& cfg);

AnovaResult run_anova(const FunctionalDataset& ds, const AnovaConfig& cfg);

// Runs the test on an ensemble built elsewhere (row 0 observed).
AnovaResult evaluate_ensemble(const TestVectorEnsemble& ensemble, StatisticKind kind, double alpha,
                              std::vector<CoordinateLabel> labels, unsigned threads = 1);

// Monte Carlo p-value of max_k F(r_k), observed included in the reference set.
double fmax_p_value(const TestVectorEnsemble& f_ensemble);
double baseline_fmax(const FunctionalDataset& ds, const AnovaConfig& cfg);

// p-min procedure: the conservative p-value of the pointwise-F test.
double baseline_pmin(const AnovaResult& f_result);

}  // namespace gfanova
