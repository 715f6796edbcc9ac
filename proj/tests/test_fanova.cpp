#include <gtest/gtest.h>

#include <map>
#include <random>

#include "gfanova/fanova.hpp"
#include "gfanova/parallel.hpp"
#include "gfanova/statistics.hpp"

namespace gfanova {
namespace {

FunctionalDataset noise_dataset(std::uint64_t seed, std::vector<Index> sizes, Index points, double shift = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  FunctionalDataset ds;
  Index n = 0;
  for (Index s : sizes) n += s;
  ds.values.resize(n, points);
  ds.grid = unit_grid(points);
  Index row = 0;
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    for (Index i = 0; i < sizes[j]; ++i, ++row) {
      ds.groups.push_back(static_cast<int>(j) + 1);
      for (Index k = 0; k < points; ++k) ds.values(row, k) = g(rng) + (j == 0 ? shift : 0.0) * (1.0 + static_cast<double>(j));
    }
  }
  return ds;
}

double binomial_cdf(Index k, Index n, double p) {
  double total = 0;
  for (Index i = 0; i <= k; ++i) {
    total += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) + i * std::log(p) +
                      (n - i) * std::log1p(-p));
  }
  return total;
}

TEST(Permutation, PreservesGroupSizes) {
  const std::vector<int> labels{1, 1, 2, 3, 3, 3, 2, 1};
  auto stream = derived_stream(5, 0);
  for (int draw = 0; draw < 200; ++draw) {
    auto permuted = permute_group_labels(labels, stream);
    auto a = labels;
    std::sort(a.begin(), a.end());
    std::sort(permuted.begin(), permuted.end());
    ASSERT_EQ(a, permuted);
  }
  auto single = derived_stream(1, 0);
  EXPECT_EQ(permute_group_labels(std::vector<int>{1}, single), std::vector<int>{1});
}

TEST(Permutation, UniformOverAssignments) {
  const std::vector<int> labels{1, 1, 1, 2, 2, 2};
  std::map<std::vector<int>, int> counts;
  auto stream = derived_stream(2024, 0);
  constexpr int kDraws = 20000;
  for (int draw = 0; draw < kDraws; ++draw) ++counts[permute_group_labels(labels, stream)];
  ASSERT_EQ(counts.size(), 20u);
  const double expected = kDraws / 20.0;
  const double sd = std::sqrt(kDraws * (1.0 / 20.0) * (19.0 / 20.0));
  double chi2 = 0;
  for (const auto& [assignment, c] : counts) {
    EXPECT_LE(std::abs(c - expected), 4 * sd);
    chi2 += (c - expected) * (c - expected) / expected;
  }
  EXPECT_LT(chi2, 43.82);  // chi-square(19) upper 0.001 point
}

TEST(Ensemble, SizeAndDeterminism) {
  const auto ds = noise_dataset(1, {4, 4, 4}, 6);
  AnovaConfig cfg;
  cfg.nperm = 1;
  cfg.seed = 9;
  EXPECT_EQ(build_ensemble(ds, cfg).size(), 2);

  cfg.nperm = 50;
  const auto a = build_ensemble(ds, cfg);
  const auto b = build_ensemble(ds, cfg);
  EXPECT_EQ(a.values(), b.values());
  EXPECT_EQ(a.dimension(), 18);
  EXPECT_EQ(a.observed().transpose(), group_means_vector(ds));
  cfg.seed = 10;
  EXPECT_NE(build_ensemble(ds, cfg).values(), a.values());
}

TEST(Ensemble, ThreadCountDoesNotChangeResults) {
  const auto ds = noise_dataset(2, {5, 6, 7}, 12, 0.4);
  for (auto kind : {StatisticKind::Means, StatisticKind::Contrasts, StatisticKind::Fstat}) {
    AnovaConfig cfg;
    cfg.nperm = 199;
    cfg.seed = 3;
    cfg.kind = kind;
    cfg.threads = 1;
    const auto one = run_anova(ds, cfg);
    cfg.threads = 4;
    const auto four = run_anova(ds, cfg);
    EXPECT_EQ(build_ensemble(ds, cfg).values(), (cfg.threads = 1, build_ensemble(ds, cfg).values()));
    EXPECT_EQ(one.pvalues.p_erl, four.pvalues.p_erl);
    EXPECT_EQ(one.envelope.lower, four.envelope.lower);
    EXPECT_EQ(one.envelope.upper, four.envelope.upper);
  }
}

TEST(Ensemble, ScaledKindsRescaleBeforePermuting) {
  auto ds = noise_dataset(4, {6, 6, 6}, 8);
  for (Index i = 12; i < 18; ++i) ds.values.row(i) *= 4.0;
  AnovaConfig cfg;
  cfg.nperm = 30;
  cfg.seed = 12;
  cfg.ma_window = 3;
  cfg.kind = StatisticKind::MeansScaled;
  const auto scaled = build_ensemble(ds, cfg);
  AnovaConfig plain = cfg;
  plain.kind = StatisticKind::Means;
  const auto reference = build_ensemble(rescale_functions(ds, 3), plain);
  EXPECT_EQ(scaled.values(), reference.values());

  cfg.kind = StatisticKind::ContrastsScaled;
  plain.kind = StatisticKind::Contrasts;
  EXPECT_EQ(build_ensemble(ds, cfg).values(), build_ensemble(rescale_functions(ds, 3), plain).values());
}

TEST(Ensemble, ExhaustiveEnumeration) {
  const auto ds = noise_dataset(5, {3, 3}, 4);
  AnovaConfig cfg;
  cfg.exhaustive_cap = 720;
  const auto e = build_ensemble(ds, cfg);
  ASSERT_EQ(e.size(), 720);
  EXPECT_EQ(e.observed().transpose(), group_means_vector(ds));
  // each of the 20 distinct assignments appears 36 times
  std::map<std::vector<double>, int> seen;
  for (Index r = 0; r < e.size(); ++r) {
    const Vector row = e.values().row(r).transpose();
    ++seen[std::vector<double>(row.data(), row.data() + row.size())];
  }
  EXPECT_EQ(seen.size(), 20u);
  for (const auto& [row, c] : seen) EXPECT_EQ(c, 36);

  cfg.exhaustive_cap = 719;
  cfg.nperm = 9;
  EXPECT_EQ(build_ensemble(ds, cfg).size(), 10);
}

TEST(CoordinateLabels, PairsAndGridPoints) {
  const Vector grid = unit_grid(3);
  const auto labels = coordinate_labels(StatisticKind::Contrasts, 3, grid);
  ASSERT_EQ(labels.size(), 9u);
  EXPECT_EQ(labels[0], (CoordinateLabel{1, 2, 0, grid(0)}));
  EXPECT_EQ(labels[4], (CoordinateLabel{1, 3, 1, grid(1)}));
  EXPECT_EQ(labels[8], (CoordinateLabel{2, 3, 2, grid(2)}));
  const auto means = coordinate_labels(StatisticKind::Means, 2, grid);
  EXPECT_EQ(means[3], (CoordinateLabel{2, 0, 0, grid(0)}));
  const auto f = coordinate_labels(StatisticKind::FstatCorrected, 4, grid);
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[2], (CoordinateLabel{0, 0, 2, grid(2)}));
}

TEST(RunAnova, SidednessFollowsKind) {
  const auto ds = noise_dataset(6, {5, 5, 5}, 10, 0.5);
  AnovaConfig cfg;
  cfg.nperm = 99;
  cfg.kind = StatisticKind::Fstat;
  const auto f = run_anova(ds, cfg);
  EXPECT_EQ(f.envelope.sidedness, Sidedness::UpperExtreme);
  EXPECT_TRUE((f.envelope.lower.array() == -std::numeric_limits<double>::infinity()).all());
  cfg.kind = StatisticKind::Contrasts;
  const auto c = run_anova(ds, cfg);
  EXPECT_EQ(c.envelope.sidedness, Sidedness::TwoSided);
  EXPECT_EQ(c.coordinate_labels.size(), 30u);
  EXPECT_TRUE(c.envelope.lower.allFinite());
}

TEST(RunAnova, RejectFlagMatchesVerdict) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto ds = noise_dataset(100 + seed, {6, 6, 6}, 15, seed % 2 == 0 ? 0.0 : 0.6);
    AnovaConfig cfg;
    cfg.nperm = 199;
    cfg.seed = seed;
    cfg.kind = static_cast<StatisticKind>(seed % 6);
    const auto r = run_anova(ds, cfg);
    EXPECT_EQ(r.reject, r.pvalues.p_erl <= cfg.alpha);
    EXPECT_EQ(r.verdict.reject, r.reject) << "seed " << seed;
    EXPECT_TRUE(r.warnings.empty());
  }
}

TEST(RunAnova, WarnsWhenLevelCannotBeReached) {
  const auto ds = noise_dataset(7, {4, 4}, 5);
  AnovaConfig cfg;
  cfg.nperm = 10;
  const auto r = run_anova(ds, cfg);
  ASSERT_FALSE(r.warnings.empty());
  EXPECT_NE(r.warnings.front().find("alpha * s"), std::string::npos);
  EXPECT_FALSE(r.reject);
}

TEST(RunAnova, LevelUnderTheNull) {
  Index rejections = 0;
  constexpr Index kRuns = 200;
  for (Index run = 0; run < kRuns; ++run) {
    const auto ds = noise_dataset(1000 + static_cast<std::uint64_t>(run), {10, 10}, 20);
    AnovaConfig cfg;
    cfg.nperm = 999;
    cfg.seed = static_cast<std::uint64_t>(run);
    cfg.threads = 1;
    rejections += run_anova(ds, cfg).reject;
  }
  // exact binomial 99% band around 0.05
  Index lo = 0, hi = kRuns;
  while (binomial_cdf(lo, kRuns, 0.05) < 0.005) ++lo;
  while (hi > 0 && binomial_cdf(hi - 1, kRuns, 0.05) >= 0.995) --hi;
  EXPECT_GE(rejections, lo);
  EXPECT_LE(rejections, hi);
}

TEST(Baselines, FmaxAndPmin) {
  auto ds = noise_dataset(8, {6, 6, 6}, 10);
  ds.values.topRows(6).array() += 25.0;  // overwhelming group effect
  AnovaConfig cfg;
  cfg.nperm = 99;
  cfg.seed = 4;
  EXPECT_DOUBLE_EQ(baseline_fmax(ds, cfg), 0.01);

  cfg.kind = StatisticKind::Fstat;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto null_ds = noise_dataset(200 + seed, {5, 5, 5}, 12);
    cfg.seed = seed;
    const auto r = run_anova(null_ds, cfg);
    EXPECT_EQ(baseline_pmin(r), r.pvalues.p_plus);
    EXPECT_GE(baseline_pmin(r), r.pvalues.p_erl);
  }
  cfg.kind = StatisticKind::Means;
  EXPECT_THROW(baseline_pmin(run_anova(ds, cfg)), InvalidInput);
}

TEST(Baselines, FmaxCountsTiesAsExtreme) {
  Matrix v(4, 2);
  v << 1, 3, 3, 0, 2, 2, 0, 1;
  EXPECT_DOUBLE_EQ(fmax_p_value(TestVectorEnsemble(v)), 0.5);
}

TEST(Config, Validation) {
  const auto ds = noise_dataset(9, {3, 3}, 4);
  AnovaConfig cfg;
  cfg.alpha = 1.5;
  EXPECT_THROW(run_anova(ds, cfg), InvalidInput);
  cfg = AnovaConfig{};
  cfg.nperm = 0;
  EXPECT_THROW(run_anova(ds, cfg), InvalidInput);
  cfg = AnovaConfig{};
  cfg.ma_window = 2;
  cfg.kind = StatisticKind::MeansScaled;
  EXPECT_THROW(run_anova(ds, cfg), InvalidInput);
  EXPECT_EQ(parse_statistic_kind("f-welch"), StatisticKind::FstatCorrected);
  EXPECT_FALSE(parse_statistic_kind("median").has_value());
}

}  // namespace
}  // namespace gfanova
