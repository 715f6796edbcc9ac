#include "gfanova/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "gfanova/parallel.hpp"

namespace gfanova {

namespace {

constexpr std::uint64_t kDataTag = 0x64617461;  // "data"
constexpr std::uint64_t kRunSeedTag = 0x72756e73;  // "runs"

// P(X <= x) for X ~ Binomial(n, p).
double binomial_cdf(Index x, Index n, double p) {
  if (x < 0) return 0.0;
  if (x >= n) return 1.0;
  if (p <= 0.0) return 1.0;
  if (p >= 1.0) return 0.0;
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const double log_n_fact = std::lgamma(static_cast<double>(n) + 1.0);
  double total = 0.0;
  for (Index k = 0; k <= x; ++k) {
    const auto kd = static_cast<double>(k);
    total += std::exp(log_n_fact - std::lgamma(kd + 1.0) - std::lgamma(static_cast<double>(n - k) + 1.0) +
                      kd * log_p + static_cast<double>(n - k) * log_q);
  }
  return std::min(1.0, total);
}

// Root of a decreasing function of p on [0, 1] by bisection.
template <typename F>
double bisect_decreasing(F&& f, double target) {
  double lo = 0.0;
  double hi = 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

const char* to_string(Model model) {
  switch (model) {
    case Model::M1:
      return "M1";
    case Model::M2:
      return "M2";
    case Model::M3:
      return "M3";
    case Model::M4:
      return "M4";
    case Model::M10:
      return "M10";
  }
  return "unknown";
}

const char* to_string(ErrorKind error) { return error == ErrorKind::WhiteNoise ? "iid" : "brownian"; }

const char* to_string(Method method) {
  switch (method) {
    case Method::GFAM:
      return "GFAM";
    case Method::GFAC:
      return "GFAC";
    case Method::REF:
      return "REF";
    case Method::FMax:
      return "F-max";
    case Method::PMin:
      return "p-min";
  }
  return "unknown";
}

std::optional<Model> parse_model(const std::string& name) {
  for (auto m : {Model::M1, Model::M2, Model::M3, Model::M4, Model::M10}) {
    if (name == to_string(m)) return m;
  }
  return std::nullopt;
}

std::optional<ErrorKind> parse_error_kind(const std::string& name) {
  if (name == "iid") return ErrorKind::WhiteNoise;
  if (name == "brownian") return ErrorKind::Brownian;
  return std::nullopt;
}

std::optional<Method> parse_method(const std::string& name) {
  for (auto m : kAllMethods) {
    if (name == to_string(m)) return m;
  }
  if (name == "gfam") return Method::GFAM;
  if (name == "gfac") return Method::GFAC;
  if (name == "ref") return Method::REF;
  if (name == "fmax" || name == "f-max") return Method::FMax;
  if (name == "pmin" || name == "p-min") return Method::PMin;
  return std::nullopt;
}

void ModelSpec::validate() const {
  if (!(sigma > 0.0)) throw InvalidInput("sigma must be positive");
  if (n_per_group < 1) throw InvalidInput("n_per_group must be positive");
  if (grid_size < 1) throw InvalidInput("grid_size must be positive");
}

double model_mean(Model model, int group, double r) {
  const double i = static_cast<double>(group);
  switch (model) {
    case Model::M1:
      return r * (1.0 - r);
    case Model::M2:
      return std::pow(r, i) * std::pow(1.0 - r, 6.0 - i);
    case Model::M3:
      return std::pow(r, i / 5.0) * std::pow(1.0 - r, 6.0 - i / 5.0);
    case Model::M4:
      return 1.0 + i / 50.0;
    case Model::M10: {
      // groups 1..10 carry the exponents of i = 2..11
      const double e = i + 1.0;
      return std::pow(r, e / 5.0) * std::pow(1.0 - r, 6.0 - e / 5.0);
    }
  }
  return 0.0;
}

FunctionalDataset generate_dataset(const ModelSpec& spec, std::mt19937_64& stream) {
  spec.validate();
  const int j = spec.groups();
  const Index n = j * spec.n_per_group;
  const Index points = spec.grid_size;

  FunctionalDataset ds;
  ds.grid = unit_grid(points);
  ds.values.resize(n, points);
  ds.groups.resize(static_cast<std::size_t>(n));

  Vector step_scale(points);
  for (Index k = 0; k < points; ++k) {
    const double previous = k == 0 ? 0.0 : ds.grid(k - 1);
    step_scale(k) = std::sqrt(ds.grid(k) - previous);
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Index row = 0; row < n; ++row) {
    const int g = static_cast<int>(row / spec.n_per_group) + 1;
    ds.groups[static_cast<std::size_t>(row)] = g;
    double path = 0.0;
    for (Index k = 0; k < points; ++k) {
      double noise = gauss(stream);
      if (spec.error == ErrorKind::Brownian) {
        path += step_scale(k) * noise;
        noise = path;
      }
      ds.values(row, k) = model_mean(spec.model, g, ds.grid(k)) + spec.sigma * noise;
    }
  }
  return ds;
}

std::pair<double, double> clopper_pearson(Index successes, Index trials, double confidence) {
  if (trials < 1 || successes < 0 || successes > trials) throw InvalidInput("invalid binomial counts");
  const double tail = 0.5 * (1.0 - confidence);
  double low = 0.0;
  double high = 1.0;
  if (successes > 0) {
    // P(X >= x | p) increases in p; solve 1 - P(X <= x-1 | p) = tail
    low = bisect_decreasing([&](double p) { return binomial_cdf(successes - 1, trials, p); }, 1.0 - tail);
  }
  if (successes < trials) {
    high = bisect_decreasing([&](double p) { return binomial_cdf(successes, trials, p); }, tail);
  }
  return {low, high};
}

PowerEstimate make_power_estimate(Index rejections, Index runs) {
  PowerEstimate est;
  est.rejections = rejections;
  est.runs = runs;
  est.rate = static_cast<double>(rejections) / static_cast<double>(runs);
  std::tie(est.ci_low, est.ci_high) = clopper_pearson(rejections, runs);
  return est;
}

std::vector<RunRecord> simulate_runs(const ModelSpec& spec, const std::vector<Method>& methods,
                                     const SimulationSettings& settings) {
  spec.validate();
  if (settings.runs < 1) throw InvalidInput("runs must be at least 1");
  if (methods.empty()) throw InvalidInput("no methods requested");

  bool need_f = false;
  for (Method m : methods) need_f = need_f || m == Method::REF || m == Method::FMax || m == Method::PMin;

  std::vector<RunRecord> records(static_cast<std::size_t>(settings.runs));
  parallel_for(
      settings.runs,
      [&](Index run) {
        auto data_stream = derived_stream(settings.seed, static_cast<std::uint64_t>(run), kDataTag);
        const FunctionalDataset ds = generate_dataset(spec, data_stream);

        AnovaConfig cfg;
        cfg.nperm = settings.nperm;
        cfg.alpha = settings.alpha;
        cfg.seed = derived_seed(settings.seed, static_cast<std::uint64_t>(run), kRunSeedTag);
        cfg.threads = 1;

        std::optional<AnovaResult> f_result;
        double fmax_p = 1.0;
        if (need_f) {
          cfg.kind = StatisticKind::Fstat;
          const TestVectorEnsemble f_ensemble = build_ensemble(ds, cfg);
          f_result = evaluate_ensemble(f_ensemble, cfg.kind, cfg.alpha,
                                       coordinate_labels(cfg.kind, ds.num_groups(), ds.grid), 1);
          fmax_p = fmax_p_value(f_ensemble);
        }

        RunRecord& record = records[static_cast<std::size_t>(run)];
        for (Method m : methods) {
          double p = 1.0;
          switch (m) {
            case Method::GFAM:
            case Method::GFAC: {
              cfg.kind = m == Method::GFAM ? StatisticKind::Means : StatisticKind::Contrasts;
              p = run_anova(ds, cfg).pvalues.p_erl;
              break;
            }
            case Method::REF:
              p = f_result->pvalues.p_erl;
              break;
            case Method::FMax:
              p = fmax_p;
              break;
            case Method::PMin:
              p = baseline_pmin(*f_result);
              break;
          }
          record.p_values.push_back(p);
          record.rejected.push_back(p <= settings.alpha);
        }
      },
      settings.threads);
  return records;
}

std::vector<PowerEstimate> estimate_powers(const ModelSpec& spec, const std::vector<Method>& methods,
                                           const SimulationSettings& settings) {
  const auto records = simulate_runs(spec, methods, settings);
  std::vector<PowerEstimate> out;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    Index rejections = 0;
    for (const auto& rec : records) rejections += rec.rejected[m];
    out.push_back(make_power_estimate(rejections, settings.runs));
  }
  return out;
}

PowerEstimate estimate_power(const ModelSpec& spec, const AnovaConfig& cfg, Index runs, std::uint64_t seed) {
  cfg.validate();
  if (runs < 1) throw InvalidInput("runs must be at least 1");
  std::vector<char> flags(static_cast<std::size_t>(runs), 0);
  parallel_for(
      runs,
      [&](Index run) {
        auto data_stream = derived_stream(seed, static_cast<std::uint64_t>(run), kDataTag);
        const FunctionalDataset ds = generate_dataset(spec, data_stream);
        AnovaConfig run_cfg = cfg;
        run_cfg.seed = derived_seed(seed, static_cast<std::uint64_t>(run), kRunSeedTag);
        run_cfg.threads = 1;
        flags[static_cast<std::size_t>(run)] = run_anova(ds, run_cfg).reject ? 1 : 0;
      },
      cfg.threads);
  Index rejections = 0;
  for (char f : flags) rejections += f;
  return make_power_estimate(rejections, runs);
}

std::vector<PowerCell> power_table(const std::vector<ModelSpec>& specs, const std::vector<Method>& methods,
                                   const std::vector<double>& sigmas, const SimulationSettings& settings) {
  if (specs.empty() || methods.empty() || sigmas.empty()) throw InvalidInput("power table axes must be nonempty");
  std::vector<PowerCell> cells;
  for (const ModelSpec& base : specs) {
    for (double sigma : sigmas) {
      ModelSpec spec = base;
      spec.sigma = sigma;
      const auto estimates = estimate_powers(spec, methods, settings);
      for (std::size_t m = 0; m < methods.size(); ++m) {
        cells.push_back({spec.model, spec.error, sigma, methods[m], estimates[m]});
      }
    }
  }
  return cells;
}

}  // namespace gfanova
