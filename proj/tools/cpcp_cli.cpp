// Command-line front end: run, sweep, select-views, synth.

#include "cpcp/errors.hpp"
#include "cpcp/io.hpp"
#include "cpcp/pipeline.hpp"

#include <CLI11.hpp>

#include <cstring>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace cpcp;

struct PipelineFlags {
  std::string method = "cpcp";
  std::vector<std::string> views;
  std::vector<std::string> metrics;
  std::string labels;
  std::string constraints;
  double budget = 0.0;
  long clusters = 0;
  double eta = kDefaultEta;
  std::string tau = "auto";
  double eps = kDefaultFloor;
  long k_final = 0;
  long k_dense = 0;
  long embed_dim = 0;
  long restarts = 10;
  std::uint64_t seed = 1;
  std::vector<double> prior;
  std::string sigma_mode = "all";
  std::string nmi_norm = "sqrt";
  bool dump_prior = false;
  std::string out;

  PipelineConfig to_config() const {
    PipelineConfig c;
    c.method = parse_method(method);
    c.views = views;
    for (const auto& m : metrics) c.metrics.push_back(parse_metric(m));
    c.labels = labels;
    c.constraints = constraints;
    c.budget = budget;
    c.clusters = clusters;
    c.eta = eta;
    if (tau == "auto") {
      c.tau = -1.0;
    } else {
      try {
        std::size_t used = 0;
        c.tau = std::stod(tau, &used);
        if (used != tau.size() || c.tau < 0.0) throw std::invalid_argument(tau);
      } catch (const std::exception&) {
        throw ValidationError("--tau expects 'auto' or a nonnegative number, got '" + tau + "'");
      }
    }
    c.eps = eps;
    c.k_final = k_final;
    c.k_dense = k_dense;
    c.embed_dim = embed_dim;
    c.restarts = restarts;
    c.seed = seed;
    c.prior = prior;
    if (sigma_mode == "all")
      c.sigma_mode = SigmaMode::AllEntries;
    else if (sigma_mode == "nonzero")
      c.sigma_mode = SigmaMode::NonzeroEntries;
    else
      throw ValidationError("--sigma-mode expects all|nonzero");
    if (nmi_norm == "sqrt")
      c.nmi_norm = NmiNorm::Sqrt;
    else if (nmi_norm == "max")
      c.nmi_norm = NmiNorm::Max;
    else
      throw ValidationError("--nmi-norm expects sqrt|max");
    c.dump_prior = dump_prior;
    c.out = out;
    return c;
  }
};

void add_pipeline_flags(CLI::App* app, PipelineFlags& f) {
  app->add_option("--method", f.method, "cpcp|mmcp|mmcp-sw|e2cp|baseline")->capture_default_str();
  app->add_option("--views", f.views, "Comma-separated feature files, one per view")->delimiter(',');
  app->add_option("--metrics", f.metrics, "Per-view metric: g (gaussian) or cos")->delimiter(',');
  app->add_option("--labels", f.labels, "Ground-truth labels, one line per instance");
  auto* constraints = app->add_option("--constraints", f.constraints, "Constraint file of 'i j +1|-1' lines");
  app->add_option("--budget", f.budget, "Fraction of all pairs to sample as constraints")->excludes(constraints);
  app->add_option("--clusters", f.clusters, "Number of clusters");
  app->add_option("--eta", f.eta, "Propagation parameter")->capture_default_str();
  app->add_option("--tau", f.tau, "Consensus threshold, or 'auto'")->capture_default_str();
  app->add_option("--eps", f.eps, "Probability floor")->capture_default_str();
  app->add_option("--k-final", f.k_final, "Final neighbourhood size (0 = round(log2(n/c)))");
  app->add_option("--k-dense", f.k_dense, "Dense neighbourhood size (0 = round(n/c))");
  app->add_option("--embed-dim", f.embed_dim, "Spectral embedding dimension (0 = c+1)");
  app->add_option("--restarts", f.restarts, "k-means restarts")->capture_default_str();
  app->add_option("--seed", f.seed, "Random seed")->capture_default_str();
  app->add_option("--prior", f.prior, "Manual view priors for mmcp")->delimiter(',');
  app->add_option("--sigma-mode", f.sigma_mode, "Sigmoid scale: all|nonzero")->capture_default_str();
  app->add_option("--nmi-norm", f.nmi_norm, "NMI normalisation: sqrt|max")->capture_default_str();
  app->add_flag("--dump-prior", f.dump_prior, "Write per-instance view probabilities");
  app->add_option("--out", f.out, "Output directory");
}

std::vector<double> default_fractions() {
  std::vector<double> out;
  for (int k = 1; k <= 8; ++k) out.push_back(0.0001 * k);
  return out;
}

int run_verb(const PipelineFlags& flags) {
  const PipelineConfig config = flags.to_config();
  const RunReport run = run_pipeline(config);
  std::cout << run.report.dump(2) << '\n';
  return 0;
}

int sweep_verb(const PipelineFlags& flags, const std::vector<double>& fractions, long repeats) {
  const PipelineConfig config = flags.to_config();
  const MultiViewDataset data = load_dataset(config);
  const std::vector<SweepRow> rows = run_sweep(config, data, fractions, repeats);
  const std::string table = sweep_table(rows);
  std::cout << table;
  if (!config.out.empty()) {
    std::filesystem::create_directories(config.out);
    write_text_file(std::filesystem::path(config.out) / "sweep.tsv", table);
    nlohmann::json report = {{"method", method_name(config.method)},
                             {"repeats", repeats},
                             {"rows", sweep_json(rows)},
                             {"config", config.to_ini("sweep")}};
    write_text_file(std::filesystem::path(config.out) / "sweep.json", report.dump(2) + "\n");
  }
  return 0;
}

int select_verb(const PipelineFlags& flags) {
  const PipelineConfig config = flags.to_config();
  const MultiViewDataset data = load_dataset(config);
  const ConstraintSet constraints = resolve_constraints(config, data, config.seed);
  const std::vector<SelectionStep> steps = view_selection(config, data, constraints);
  const std::string table = selection_table(steps);
  std::cout << table;
  if (!config.out.empty()) {
    std::filesystem::create_directories(config.out);
    write_text_file(std::filesystem::path(config.out) / "selection.tsv", table);
    nlohmann::json report = {{"trace", selection_json(steps, config.views)},
                             {"config", config.to_ini("select-views")}};
    write_text_file(std::filesystem::path(config.out) / "selection.json", report.dump(2) + "\n");
  }
  return 0;
}

struct SynthFlags {
  long n = 300;
  long clusters = 3;
  std::vector<long> dims{5, 5, 5};
  std::vector<double> spread{1.0};
  std::vector<long> noise_views;
  double separation = 3.0;
  std::uint64_t seed = 1;
  std::string out;
};

int synth_verb(const SynthFlags& f) {
  if (f.out.empty()) throw ValidationError("synth needs --out");
  SyntheticSpec spec;
  spec.n = f.n;
  spec.clusters = f.clusters;
  spec.separation = f.separation;
  spec.seed = f.seed;
  for (std::size_t s = 0; s < f.dims.size(); ++s) {
    SyntheticView v;
    v.dim = f.dims[s];
    v.spread = f.spread.size() == 1 ? f.spread.front() : f.spread.at(s);
    spec.views.push_back(v);
  }
  if (f.spread.size() != 1 && f.spread.size() != f.dims.size())
    throw ValidationError("--spread needs one value or one per view");
  for (long s : f.noise_views) {
    if (s < 0 || s >= static_cast<long>(spec.views.size())) throw ValidationError("--noise-views index out of range");
    spec.views[static_cast<std::size_t>(s)].noise = true;
  }
  const MultiViewDataset data = generate_synthetic(spec);
  const std::filesystem::path dir(f.out);
  std::filesystem::create_directories(dir);
  std::string views;
  for (std::size_t s = 0; s < data.views.size(); ++s) {
    const auto path = dir / ("view" + std::to_string(s) + ".txt");
    write_feature_file(path, data.views[s].values);
    views += (s ? "," : "") + path.string();
  }
  write_label_file(dir / "labels.txt", data.labels);
  std::cout << "views=" << views << "\nlabels=" << (dir / "labels.txt").string() << '\n';
  return 0;
}

// CLI11 reads [section] config files only through a root-level option, so a
// --config given after the verb is moved in front of it.
std::vector<std::string> hoist_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  for (std::size_t k = 1; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) {
      std::vector<std::string> moved{args[k], args[k + 1]};
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(k), args.begin() + static_cast<std::ptrdiff_t>(k + 2));
      args.insert(args.begin(), moved.begin(), moved.end());
      break;
    }
    if (args[k].rfind("--config=", 0) == 0) {
      std::string moved = args[k];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(k));
      args.insert(args.begin(), moved);
      break;
    }
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("Multi-view constrained clustering with consensus view priors");
  app.set_config("--config", "", "INI file with [run], [sweep] or [select-views] sections");
  app.require_subcommand(1);

  PipelineFlags run_flags, sweep_flags, select_flags;
  auto* run = app.add_subcommand("run", "Cluster one dataset and write a report");
  add_pipeline_flags(run, run_flags);

  auto* sweep = app.add_subcommand("sweep", "NMI over a range of constraint budgets");
  add_pipeline_flags(sweep, sweep_flags);
  std::vector<double> fractions = default_fractions();
  long repeats = 1;
  sweep->add_option("--fractions", fractions, "Budget fractions")->delimiter(',');
  sweep->add_option("--repeats", repeats, "Seeded trials per fraction")->capture_default_str();

  auto* select = app.add_subcommand("select-views", "Eliminate views by smallest marginal P(G)");
  add_pipeline_flags(select, select_flags);

  SynthFlags synth_flags;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic multi-view dataset");
  synth->add_option("--n", synth_flags.n, "Instances")->capture_default_str();
  synth->add_option("--clusters", synth_flags.clusters, "Clusters")->capture_default_str();
  synth->add_option("--dims", synth_flags.dims, "Dimension of each view")->delimiter(',');
  synth->add_option("--spread", synth_flags.spread, "Blob standard deviation (one or per view)")->delimiter(',');
  synth->add_option("--noise-views", synth_flags.noise_views, "Views replaced by pure noise")->delimiter(',');
  synth->add_option("--separation", synth_flags.separation, "Spread of the cluster centres")->capture_default_str();
  synth->add_option("--seed", synth_flags.seed, "Random seed")->capture_default_str();
  synth->add_option("--out", synth_flags.out, "Output directory")->required();

  try {
    std::vector<std::string> args = hoist_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*run) return run_verb(run_flags);
    if (*sweep) return sweep_verb(sweep_flags, fractions, repeats);
    if (*select) return select_verb(select_flags);
    if (*synth) return synth_verb(synth_flags);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
