#include "gfanova/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "gfanova/io.hpp"
#include "gfanova/statistics.hpp"

namespace gfanova::cli {

namespace {

struct TestOptions {
  std::string input;
  std::string kind = "means";
  double alpha = 0.05;
  Index nperm = 1999;
  std::optional<std::uint64_t> seed;
  Index ma_window = 1;
  std::string weights;
  std::string out;
  std::string plot;
  unsigned threads = 0;
  std::uint64_t exhaustive_cap = 0;
};

struct SimulateOptions {
  std::string model = "M1";
  std::string error = "iid";
  std::vector<double> sigmas = kDefaultSigmas;
  std::vector<std::string> methods{"GFAM", "GFAC", "REF", "F-max", "p-min"};
  Index runs = 200;
  Index nperm = 999;
  bool extended_perms = false;
  std::uint64_t seed = 1;
  double alpha = 0.05;
  Index n_per_group = 10;
  Index grid_size = 100;
  unsigned threads = 0;
  std::string out;
};

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw io::ParseError(0, 0, "cannot write " + path);
  file << text;
}

int run_test(const TestOptions& opt, std::ostream& out, std::ostream& err) {
  const auto kind = parse_statistic_kind(opt.kind);
  if (!kind) {
    err << "unknown --kind '" << opt.kind << "'\n";
    return kExitInputError;
  }

  FunctionalDataset ds = io::load_dataset(opt.input);
  const bool weighted = !opt.weights.empty();
  if (weighted) {
    const Vector counts = io::load_weights(opt.weights);
    if (counts.size() != ds.size()) {
      err << "weights file has " << counts.size() << " values for " << ds.size() << " functions\n";
      return kExitInputError;
    }
    ds.values = scale_summary_functions(ds.values, counts);
  }

  AnovaConfig cfg;
  cfg.kind = *kind;
  cfg.alpha = opt.alpha;
  cfg.nperm = opt.nperm;
  cfg.ma_window = opt.ma_window;
  cfg.threads = opt.threads;
  cfg.exhaustive_cap = opt.exhaustive_cap;
  if (opt.seed) {
    cfg.seed = *opt.seed;
  } else {
    std::random_device entropy;
    cfg.seed = (static_cast<std::uint64_t>(entropy()) << 32) | entropy();
  }

  const AnovaResult result = run_anova(ds, cfg);
  const io::ResultDocument doc = io::make_document(result, cfg, weighted);
  for (const auto& w : doc.warnings) err << "warning: " << w << '\n';
  write_output(opt.out, io::to_json(doc), out);
  if (!opt.plot.empty()) io::emit_envelope_figure(doc, opt.plot);
  return kExitOk;
}

int run_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
  const auto model = parse_model(opt.model);
  const auto error = parse_error_kind(opt.error);
  if (!model || !error) {
    err << "unknown --model or --error\n";
    return kExitInputError;
  }
  std::vector<Method> methods;
  for (const auto& name : opt.methods) {
    const auto m = parse_method(name);
    if (!m) {
      err << "unknown method '" << name << "'\n";
      return kExitInputError;
    }
    methods.push_back(*m);
  }

  ModelSpec spec;
  spec.model = *model;
  spec.error = *error;
  spec.n_per_group = opt.n_per_group;
  spec.grid_size = opt.grid_size;

  SimulationSettings settings;
  settings.runs = opt.runs;
  settings.nperm = opt.extended_perms ? 9999 : opt.nperm;
  settings.alpha = opt.alpha;
  settings.seed = opt.seed;
  settings.threads = opt.threads;

  std::ostringstream table;
  io::write_power_table(table, power_table({spec}, methods, opt.sigmas, settings));
  write_output(opt.out, table.str(), out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graphical functional ANOVA with global envelope tests", "gfanova"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  TestOptions test;
  auto* test_cmd = app.add_subcommand("test", "Run a one-way functional ANOVA test on a wide CSV dataset");
  test_cmd->add_option("input", test.input, "Wide CSV: header 'group,r_1,...,r_K', one function per row")
      ->required();
  test_cmd->add_option("--kind", test.kind, "means|contrasts|means-scaled|contrasts-scaled|f|f-welch")
      ->capture_default_str();
  test_cmd->add_option("--alpha", test.alpha, "Significance level")->capture_default_str();
  test_cmd->add_option("--nperm", test.nperm, "Number of permutation replicates")->capture_default_str();
  test_cmd->add_option("--seed", test.seed, "Random seed (drawn from entropy and echoed when absent)");
  test_cmd->add_option("--ma-window", test.ma_window, "Odd moving-average window for variance smoothing")
      ->capture_default_str();
  test_cmd->add_option("--weights", test.weights, "Per-function counts m_i for 1/m variance scaling");
  test_cmd->add_option("--out", test.out, "Result document path (stdout when omitted)");
  test_cmd->add_option("--plot", test.plot, "SVG envelope figure path");
  test_cmd->add_option("--threads", test.threads, "Worker threads (0: FANOVA_THREADS or hardware)");
  test_cmd->add_option("--exhaustive-cap", test.exhaustive_cap,
                       "Enumerate all label permutations when N! does not exceed this cap");

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Estimate rejection rates under the simulation models");
  sim_cmd->add_option("--model", sim.model, "M1|M2|M3|M4|M10")->capture_default_str();
  sim_cmd->add_option("--error", sim.error, "iid|brownian")->capture_default_str();
  sim_cmd->add_option("--sigma", sim.sigmas, "Comma-separated noise levels")->delimiter(',');
  sim_cmd->add_option("--methods", sim.methods, "Comma-separated subset of GFAM,GFAC,REF,F-max,p-min")
      ->delimiter(',');
  sim_cmd->add_option("--runs", sim.runs, "Simulated datasets per cell")->capture_default_str();
  sim_cmd->add_option("--nperm", sim.nperm, "Permutation replicates per test")->capture_default_str();
  sim_cmd->add_flag("--extended-perms", sim.extended_perms, "Use 9999 permutations (many-group power recovery)");
  sim_cmd->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  sim_cmd->add_option("--alpha", sim.alpha, "Significance level")->capture_default_str();
  sim_cmd->add_option("--n-per-group", sim.n_per_group, "Functions per group")->capture_default_str();
  sim_cmd->add_option("--grid-size", sim.grid_size, "Grid points on (0, 1]")->capture_default_str();
  sim_cmd->add_option("--threads", sim.threads, "Worker threads (0: FANOVA_THREADS or hardware)");
  sim_cmd->add_option("--out", sim.out, "CSV table path (stdout when omitted)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitInputError;
  }

  try {
    if (*test_cmd) return run_test(test, out, err);
    return run_simulate(sim, out, err);
  } catch (const DegenerateVariance& e) {
    err << "degenerate variance: " << e.what() << '\n';
    return kExitDegenerateVariance;
  } catch (const io::ParseError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitInputError;
  }
}

}  // namespace gfanova::cli
