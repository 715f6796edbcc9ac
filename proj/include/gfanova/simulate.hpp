#pragma once

// Simulation models for level and power studies of the functional ANOVA
// tests, and Monte Carlo estimation of rejection rates.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gfanova/dataset.hpp"
#include "gfanova/fanova.hpp"

namespace gfanova {

enum class Model { M1, M2, M3, M4, M10 };
enum class ErrorKind { WhiteNoise, Brownian };

// Methods compared in power tables. FMax and PMin share REF's F ensemble.
enum class Method { GFAM, GFAC, REF, FMax, PMin };

const char* to_string(Model model);
const char* to_string(ErrorKind error);
const char* to_string(Method method);
std::optional<Model> parse_model(const std::string& name);
std::optional<ErrorKind> parse_error_kind(const std::string& name);
std::optional<Method> parse_method(const std::string& name);

inline const std::vector<double> kDefaultSigmas{0.05, 0.1, 0.15, 0.2, 0.4, 0.8};
inline const std::vector<Method> kAllMethods{Method::GFAM, Method::GFAC, Method::REF, Method::FMax, Method::PMin};

struct ModelSpec {
  Model model = Model::M1;
  ErrorKind error = ErrorKind::WhiteNoise;
  double sigma = 0.05;
  Index n_per_group = 10;
  Index grid_size = 100;

  int groups() const { return model == Model::M10 ? 10 : 3; }
  void validate() const;
};

// Deterministic part of group g (1-based) at point r.
double model_mean(Model model, int group, double r);

FunctionalDataset generate_dataset(const ModelSpec& spec, std::mt19937_64& stream);

struct PowerEstimate {
  Index rejections = 0;
  Index runs = 0;
  double rate = 0.0;
  double ci_low = 0.0;  // Clopper-Pearson 95%
  double ci_high = 1.0;
};

PowerEstimate make_power_estimate(Index rejections, Index runs);

// Exact (Clopper-Pearson) two-sided interval for a binomial proportion.
std::pair<double, double> clopper_pearson(Index successes, Index trials, double confidence = 0.95);

// Per-run p-value and decision of every requested method on one dataset.
struct RunRecord {
  std::vector<double> p_values;  // aligned with the requested methods
  std::vector<bool> rejected;
};

struct SimulationSettings {
  Index runs = 200;
  Index nperm = 999;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

// Run r draws its dataset from derived_stream(seed, r) and uses
// derived_seed(seed, r) for permutations; all methods see the same dataset.
std::vector<RunRecord> simulate_runs(const ModelSpec& spec, const std::vector<Method>& methods,
                                     const SimulationSettings& settings);

std::vector<PowerEstimate> estimate_powers(const ModelSpec& spec, const std::vector<Method>& methods,
                                           const SimulationSettings& settings);

// Rejection rate of one test pipeline (cfg.kind); cfg.nperm and cfg.alpha
// are used, the run seeds derive from `seed`.
PowerEstimate estimate_power(const ModelSpec& spec, const AnovaConfig& cfg, Index runs, std::uint64_t seed);

struct PowerCell {
  Model model;
  ErrorKind error;
  double sigma;
  Method method;
  PowerEstimate estimate;
};

// One cell per (model, error, sigma, method), in that nesting order.
std::vector<PowerCell> power_table(const std::vector<ModelSpec>& specs, const std::vector<Method>& methods,
                                   const std::vector<double>& sigmas, const SimulationSettings& settings);

}  // namespace gfanova
