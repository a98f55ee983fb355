#include "cpcp/pipeline.hpp"

#include "cpcp/consensus.hpp"
#include "cpcp/errors.hpp"
#include "cpcp/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

namespace cpcp {

Method parse_method(std::string_view name) {
  if (name == "cpcp") return Method::Cpcp;
  if (name == "mmcp") return Method::Mmcp;
  if (name == "mmcp-sw") return Method::MmcpSw;
  if (name == "e2cp") return Method::E2cp;
  if (name == "baseline") return Method::Baseline;
  throw ValidationError("unknown method '" + std::string(name) + "' (expected cpcp|mmcp|mmcp-sw|e2cp|baseline)");
}

std::string_view method_name(Method method) {
  switch (method) {
    case Method::Cpcp: return "cpcp";
    case Method::Mmcp: return "mmcp";
    case Method::MmcpSw: return "mmcp-sw";
    case Method::E2cp: return "e2cp";
    case Method::Baseline: return "baseline";
  }
  return "cpcp";
}

namespace {

std::string shortest(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

template <class Range, class Fn>
std::string joined(const Range& items, Fn&& format) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += ',';
    out += format(item);
  }
  return out;
}

}  // namespace

std::string PipelineConfig::to_ini(std::string_view section) const {
  std::ostringstream out;
  out << '[' << section << "]\n";
  out << "method=" << method_name(method) << '\n';
  out << "views=" << joined(views, [](const std::string& s) { return s; }) << '\n';
  if (!metrics.empty()) out << "metrics=" << joined(metrics, [](Metric m) { return std::string(metric_name(m)); }) << '\n';
  if (!labels.empty()) out << "labels=" << labels << '\n';
  if (!constraints.empty()) out << "constraints=" << constraints << '\n';
  if (budget > 0.0) out << "budget=" << shortest(budget) << '\n';
  out << "clusters=" << clusters << '\n';
  out << "eta=" << shortest(eta) << '\n';
  out << "tau=" << (tau < 0.0 ? std::string("auto") : shortest(tau)) << '\n';
  out << "eps=" << shortest(eps) << '\n';
  out << "k-final=" << k_final << '\n';
  out << "k-dense=" << k_dense << '\n';
  out << "embed-dim=" << embed_dim << '\n';
  out << "restarts=" << restarts << '\n';
  out << "seed=" << seed << '\n';
  if (!prior.empty()) out << "prior=" << joined(prior, shortest) << '\n';
  out << "sigma-mode=" << (sigma_mode == SigmaMode::AllEntries ? "all" : "nonzero") << '\n';
  out << "nmi-norm=" << (nmi_norm == NmiNorm::Sqrt ? "sqrt" : "max") << '\n';
  out << "dump-prior=" << (dump_prior ? "true" : "false") << '\n';
  return out.str();
}

Index default_k_final(Index n, Index clusters) {
  if (clusters < 1) throw ValidationError("cluster count must be positive");
  const auto k = static_cast<Index>(std::llround(std::log2(static_cast<double>(n) / static_cast<double>(clusters))));
  return std::clamp<Index>(k, 1, std::max<Index>(n - 1, 1));
}

ResolvedParameters resolve_parameters(const PipelineConfig& config, Index n) {
  if (config.clusters < 2) throw ValidationError("--clusters must be at least 2");
  if (config.clusters > n) throw ValidationError("more clusters than instances");
  ResolvedParameters p;
  p.k_final = config.k_final > 0 ? config.k_final : default_k_final(n, config.clusters);
  p.k_dense = config.k_dense > 0 ? config.k_dense : dense_neighborhood_size(n, config.clusters);
  p.embed_dim = config.embed_dim > 0 ? config.embed_dim : config.clusters + 1;
  p.tau = config.tau >= 0.0 ? config.tau
                            : static_cast<double>(std::llround(kDefaultTauFraction * static_cast<double>(p.k_dense)));
  if (p.k_final >= n || p.k_dense >= n) throw ValidationError("neighbourhood size must be smaller than n");
  return p;
}

MultiViewDataset load_dataset(const PipelineConfig& config) {
  if (config.views.empty()) throw ValidationError("no view files given (--views)");
  if (!config.metrics.empty() && config.metrics.size() != config.views.size())
    throw ValidationError("--metrics needs one entry per view");
  MultiViewDataset data;
  for (std::size_t s = 0; s < config.views.size(); ++s) {
    FeatureMatrix view{read_feature_file(config.views[s]),
                       config.metrics.empty() ? Metric::EuclideanGaussian : config.metrics[s]};
    if (!data.views.empty() && view.rows() != data.size())
      throw ValidationError("'" + config.views[s] + "' has " + std::to_string(view.rows()) + " rows, expected " +
                            std::to_string(data.size()));
    data.views.push_back(std::move(view));
  }
  if (!config.labels.empty()) {
    data.labels = read_label_file(config.labels);
    if (static_cast<Index>(data.labels.size()) != data.size())
      throw ValidationError("'" + config.labels + "' has " + std::to_string(data.labels.size()) +
                            " lines, expected " + std::to_string(data.size()));
  }
  return data;
}

PreparedModel prepare_model(const PipelineConfig& config, const MultiViewDataset& data) {
  if (data.views.empty()) throw ValidationError("dataset has no views");
  const Index n = data.size();
  for (const auto& v : data.views)
    if (v.rows() != n) throw ValidationError("views disagree on the number of instances");
  if (!(config.eps > 0.0)) throw ValidationError("--eps must be positive");
  if (!(config.eta > 0.0)) throw ValidationError("--eta must be positive");

  PreparedModel model;
  model.method = config.method;
  model.n = n;
  model.params = resolve_parameters(config, n);
  const auto views = static_cast<Index>(data.views.size());

  std::vector<FeatureMatrix> features;
  for (const auto& v : data.views) features.push_back(preprocess(v));

  if (config.method == Method::Cpcp) {
    std::vector<AffinityMatrix> dense;
    std::vector<NeighborLists> neighbors;
    std::vector<Matrix> transitions;
    for (const auto& f : features) {
      neighbors.push_back(knn_lists(f, model.params.k_dense));
      dense.push_back(build_knn_affinity(f, neighbors.back()));
      transitions.push_back(transition_matrix(floored_affinity(dense.back(), config.eps)));
    }
    model.prior = build_view_prior(dense, neighbors, model.params.tau, config.eps);
    model.unified = unified_graph(model.prior->factor.instance_marginal,
                                  model.prior->reconciled.normalized.graph_given_instance, transitions,
                                  model.params.k_final);
    model.graph_marginal = model.prior->factor.graph_marginal;
    if (model.prior->reconciled.clamped > 0)
      model.warnings.push_back(std::to_string(model.prior->reconciled.clamped) +
                               " reconciled probabilities were clamped to eps");
    return model;
  }

  for (const auto& f : features)
    model.view_affinities.push_back(build_knn_affinity(f, model.params.k_final).dense());

  if (config.method == Method::Mmcp || config.method == Method::MmcpSw) {
    Vector prior = Vector::Constant(views, 1.0 / static_cast<double>(views));
    if (config.method == Method::Mmcp) {
      if (static_cast<Index>(config.prior.size()) != views)
        throw ValidationError("mmcp needs --prior with one probability per view");
      prior = Eigen::Map<const Vector>(config.prior.data(), views);
    }
    Matrix instance_given_graph(n, views);
    std::vector<Matrix> transitions;
    for (Index s = 0; s < views; ++s) {
      Matrix w = model.view_affinities[static_cast<std::size_t>(s)];
      w.array() += config.eps;
      w.diagonal().setZero();
      instance_given_graph.col(s) = instance_probability(w);
      transitions.push_back(transition_matrix(w));
    }
    model.mmcp = mmcp_unified(instance_given_graph, transitions, prior);
    model.graph_marginal = prior / prior.sum();
    return model;
  }

  model.graph_marginal = Vector::Constant(views, 1.0 / static_cast<double>(views));
  return model;
}

Matrix e2cp_adjust(const Matrix& affinity, const Matrix& f) {
  if (affinity.rows() != f.rows() || affinity.cols() != f.cols())
    throw ValidationError("affinity and propagation result differ in shape");
  Matrix out = affinity.binaryExpr(f, [](double w, double raw) {
    const double v = std::clamp(raw, -1.0, 1.0);
    return v >= 0.0 ? 1.0 - (1.0 - w) * (1.0 - v) : (1.0 + v) * w;
  });
  out.diagonal().setZero();
  return out;
}

Matrix fuse_e2cp(std::span<const Matrix> affinities) {
  if (affinities.empty()) throw ValidationError("nothing to fuse");
  Matrix out = affinities.front();
  for (std::size_t s = 1; s < affinities.size(); ++s) {
    if (affinities[s].rows() != out.rows() || affinities[s].cols() != out.cols())
      throw ValidationError("affinities to fuse differ in shape");
    out += affinities[s];
  }
  return out / static_cast<double>(affinities.size());
}

RunOutcome solve(const PreparedModel& model, const PipelineConfig& config, const ConstraintSet& constraints,
                 const LabelSets& truth) {
  RunOutcome out;
  out.must_links = constraints.must_links.size();
  out.cannot_links = constraints.cannot_links.size();
  const SideInformation si = side_information(constraints, model.n);

  Matrix affinity;
  switch (model.method) {
    case Method::Cpcp: {
      if (constraints.must_links.empty())
        out.warnings.push_back("no must-link constraints; balance weight falls back to 1");
      else if (constraints.cannot_links.empty())
        out.warnings.push_back("no cannot-link constraints; balance weight falls back to 1");
      out.balance_alpha = balance_weight(constraints);
      affinity = sigmoid_affinity(propagate_balanced(*model.unified, si, config.eta, out.balance_alpha).f,
                                  config.sigma_mode);
      break;
    }
    case Method::Mmcp:
    case Method::MmcpSw:
      affinity = sigmoid_affinity(propagate_mmcp(model.mmcp->pi, model.mmcp->transition, Matrix(si.y), config.eta).f,
                                  config.sigma_mode);
      break;
    case Method::E2cp: {
      const Matrix y(si.y);
      std::vector<Matrix> adjusted;
      for (const Matrix& w : model.view_affinities) {
        Matrix floored = w;
        floored.array() += config.eps;
        floored.diagonal().setZero();
        adjusted.push_back(e2cp_adjust(w, propagate_e2cp(floored, y, config.eta).f));
      }
      affinity = fuse_e2cp(adjusted);
      break;
    }
    case Method::Baseline:
      affinity = fuse_e2cp(model.view_affinities);
      break;
  }

  SpectralOptions options;
  options.clusters = config.clusters;
  options.embed_dim = model.params.embed_dim;
  options.restarts = config.restarts;
  options.seed = config.seed;
  out.assignment = spectral_clustering(affinity, options);
  if (out.assignment.degenerate_spectrum)
    out.warnings.push_back("fewer numerically distinct Laplacian eigenvalues than embedding dimensions");

  if (!truth.empty()) {
    const bool single = is_single_label(truth);
    const std::vector<int> flat = single ? first_labels(truth) : std::vector<int>{};
    for (const auto& labels : out.assignment.restart_labels)
      out.restart_nmi.push_back(single ? nmi(labels, flat, config.nmi_norm)
                                       : multilabel_nmi(labels, truth, config.nmi_norm));
    out.nmi = summarize(out.restart_nmi);
  }
  return out;
}

ConstraintSet resolve_constraints(const PipelineConfig& config, const MultiViewDataset& data, std::uint64_t seed) {
  if (!config.constraints.empty()) return read_constraints_file(config.constraints, data.size());
  if (config.budget > 0.0) {
    if (data.labels.empty()) throw ValidationError("--budget needs ground-truth labels (--labels)");
    const std::vector<int> flat = first_labels(data.labels);
    return sample_constraints(flat, config.budget, seed);
  }
  if (config.method != Method::Baseline)
    throw ValidationError("method '" + std::string(method_name(config.method)) +
                          "' needs --constraints or --budget");
  return {};
}

namespace {

nlohmann::json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

RunReport run_pipeline(const PipelineConfig& config, const MultiViewDataset& data, const ConstraintSet& constraints) {
  RunReport run;
  run.model = prepare_model(config, data);
  RunOutcome outcome = solve(run.model, config, constraints, data.labels);
  run.assignment = outcome.assignment;

  nlohmann::json& r = run.report;
  r["method"] = method_name(config.method);
  r["instances"] = run.model.n;
  r["views"] = data.views.size();
  r["clusters"] = config.clusters;
  r["parameters"] = {{"k_final", run.model.params.k_final},
                     {"k_dense", run.model.params.k_dense},
                     {"embed_dim", run.model.params.embed_dim},
                     {"eta", config.eta},
                     {"tau", run.model.params.tau},
                     {"eps", config.eps},
                     {"restarts", config.restarts},
                     {"seed", config.seed},
                     {"balance_alpha", outcome.balance_alpha}};
  r["constraints"] = {{"must_link", outcome.must_links}, {"cannot_link", outcome.cannot_links}};
  r["graph_marginal"] = vector_json(run.model.graph_marginal);
  if (run.model.prior) r["pruned_edges"] = run.model.prior->pruned_edges;
  if (!outcome.restart_nmi.empty()) {
    double best = outcome.restart_nmi.front(), best_inertia = outcome.assignment.restart_inertia.front();
    for (std::size_t k = 1; k < outcome.restart_nmi.size(); ++k)
      if (outcome.assignment.restart_inertia[k] < best_inertia) {
        best_inertia = outcome.assignment.restart_inertia[k];
        best = outcome.restart_nmi[k];
      }
    r["nmi"] = {{"avg", outcome.nmi.avg},
                {"max", outcome.nmi.max},
                {"min", outcome.nmi.min},
                {"selected", best},
                {"restarts", outcome.restart_nmi}};
  }
  r["restart_inertia"] = outcome.assignment.restart_inertia;
  std::vector<std::string> warnings = run.model.warnings;
  warnings.insert(warnings.end(), outcome.warnings.begin(), outcome.warnings.end());
  r["warnings"] = warnings;
  r["config"] = config.to_ini("run");
  return run;
}

RunReport run_pipeline(const PipelineConfig& config) {
  const MultiViewDataset data = load_dataset(config);
  const ConstraintSet constraints = resolve_constraints(config, data, config.seed);
  RunReport run = run_pipeline(config, data, constraints);
  if (!config.out.empty()) write_run_outputs(config.out, config, run);
  return run;
}

void write_run_outputs(const std::filesystem::path& dir, const PipelineConfig& config, const RunReport& run) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory '" + dir.string() + "': " + ec.message());

  write_text_file(dir / "report.json", run.report.dump(2) + "\n");
  write_assignment_file(dir / "assignments.txt", run.assignment.labels);
  write_text_file(dir / "config.ini", config.to_ini("run"));

  std::ostringstream marginals;
  marginals << "view\tpath\tmarginal\n";
  for (Index s = 0; s < run.model.graph_marginal.size(); ++s)
    marginals << s << '\t' << (static_cast<std::size_t>(s) < config.views.size() ? config.views[s] : "") << '\t'
              << shortest(run.model.graph_marginal(s)) << '\n';
  write_text_file(dir / "view_marginals.tsv", marginals.str());

  std::ostringstream restarts;
  restarts << "restart\tinertia";
  const bool scored = run.report.contains("nmi");
  if (scored) restarts << "\tnmi";
  restarts << '\n';
  for (std::size_t k = 0; k < run.assignment.restart_inertia.size(); ++k) {
    restarts << k << '\t' << shortest(run.assignment.restart_inertia[k]);
    if (scored) restarts << '\t' << shortest(run.report["nmi"]["restarts"][k].get<double>());
    restarts << '\n';
  }
  write_text_file(dir / "restarts.tsv", restarts.str());

  if (config.dump_prior && run.model.prior) {
    const ViewPrior& p = *run.model.prior;
    const Matrix& g = p.reconciled.normalized.graph_given_instance;
    std::ostringstream dump;
    dump << "# P(G)";
    for (Index s = 0; s < run.model.graph_marginal.size(); ++s) dump << '\t' << shortest(run.model.graph_marginal(s));
    dump << "\ninstance";
    for (Index s = 0; s < g.cols(); ++s) dump << "\tP(G" << s << "|u)";
    for (Index s = 0; s < g.cols(); ++s) dump << "\tc" << s;
    dump << '\n';
    for (Index i = 0; i < g.rows(); ++i) {
      dump << i;
      for (Index s = 0; s < g.cols(); ++s) dump << '\t' << shortest(g(i, s));
      for (Index s = 0; s < g.cols(); ++s) dump << '\t' << shortest(p.consistency(i, s));
      dump << '\n';
    }
    write_text_file(dir / "prior_dump.tsv", dump.str());
  }
}

std::vector<SweepRow> run_sweep(const PipelineConfig& config, const MultiViewDataset& data,
                                std::span<const double> fractions, Index repeats) {
  if (data.labels.empty()) throw ValidationError("a sweep needs ground-truth labels");
  if (repeats < 1) throw ValidationError("--repeats must be at least 1");
  if (fractions.empty()) throw ValidationError("a sweep needs at least one budget fraction");
  const PreparedModel model = prepare_model(config, data);
  const std::vector<int> flat = first_labels(data.labels);

  std::vector<SweepRow> rows;
  for (std::size_t f = 0; f < fractions.size(); ++f) {
    SweepRow row;
    row.fraction = fractions[f];
    for (Index t = 0; t < repeats; ++t) {
      const std::uint64_t seed = config.seed + 1000 * static_cast<std::uint64_t>(f) + static_cast<std::uint64_t>(t);
      const ConstraintSet constraints = sample_constraints(flat, fractions[f], seed);
      row.trials.push_back(solve(model, config, constraints, data.labels).nmi.avg);
    }
    row.nmi = summarize(row.trials);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SelectionStep> view_selection(const PipelineConfig& config, const MultiViewDataset& data,
                                          const ConstraintSet& constraints) {
  if (data.views.size() < 2) throw ValidationError("view selection needs at least 2 views");
  PipelineConfig cfg = config;
  cfg.method = Method::Cpcp;

  std::vector<Index> active(data.views.size());
  for (std::size_t s = 0; s < active.size(); ++s) active[s] = static_cast<Index>(s);

  std::vector<SelectionStep> steps;
  while (active.size() >= 2) {
    MultiViewDataset subset;
    subset.labels = data.labels;
    for (Index s : active) subset.views.push_back(data.views[static_cast<std::size_t>(s)]);
    const PreparedModel model = prepare_model(cfg, subset);

    SelectionStep step;
    step.views = active;
    step.graph_marginal = model.graph_marginal;
    if (!data.labels.empty()) step.nmi = solve(model, cfg, constraints, data.labels).nmi;
    Index weakest = 0;
    for (Index s = 1; s < step.graph_marginal.size(); ++s)
      if (step.graph_marginal(s) < step.graph_marginal(weakest)) weakest = s;
    step.eliminated = active[static_cast<std::size_t>(weakest)];
    active.erase(active.begin() + weakest);
    steps.push_back(std::move(step));
  }
  return steps;
}

nlohmann::json selection_json(const std::vector<SelectionStep>& steps, const std::vector<std::string>& names) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& step : steps) {
    nlohmann::json views = nlohmann::json::array();
    for (Index s : step.views)
      views.push_back(static_cast<std::size_t>(s) < names.size() ? nlohmann::json(names[s]) : nlohmann::json(s));
    out.push_back({{"views", views},
                   {"view_indices", step.views},
                   {"graph_marginal", vector_json(step.graph_marginal)},
                   {"nmi", {{"avg", step.nmi.avg}, {"max", step.nmi.max}, {"min", step.nmi.min}}},
                   {"eliminated", step.eliminated}});
  }
  return out;
}

std::string selection_table(const std::vector<SelectionStep>& steps) {
  std::ostringstream out;
  out << "view_count\tavg\tmax\tmin\teliminated\n";
  for (const auto& step : steps)
    out << step.views.size() << '\t' << shortest(step.nmi.avg) << '\t' << shortest(step.nmi.max) << '\t'
        << shortest(step.nmi.min) << '\t' << step.eliminated << '\n';
  return out.str();
}

MultiViewDataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n < 2 || spec.clusters < 1 || spec.clusters > spec.n)
    throw ValidationError("synthetic data needs n >= 2 and 1 <= clusters <= n");
  if (spec.views.empty()) throw ValidationError("synthetic data needs at least one view");

  MultiViewDataset data;
  data.labels.resize(static_cast<std::size_t>(spec.n));
  for (Index i = 0; i < spec.n; ++i) data.labels[static_cast<std::size_t>(i)] = {static_cast<int>(i % spec.clusters)};

  for (std::size_t s = 0; s < spec.views.size(); ++s) {
    const SyntheticView& v = spec.views[s];
    if (v.dim < 1) throw ValidationError("synthetic view dimension must be positive");
    std::mt19937_64 rng(spec.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(s));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    FeatureMatrix view{Matrix(spec.n, v.dim), v.metric};
    if (v.noise) {
      for (Index i = 0; i < spec.n; ++i)
        for (Index d = 0; d < v.dim; ++d) view.values(i, d) = uniform(rng);
    } else {
      Matrix centres(spec.clusters, v.dim);
      for (Index c = 0; c < spec.clusters; ++c)
        for (Index d = 0; d < v.dim; ++d) centres(c, d) = spec.separation * normal(rng);
      for (Index i = 0; i < spec.n; ++i)
        for (Index d = 0; d < v.dim; ++d) view.values(i, d) = centres(i % spec.clusters, d) + v.spread * normal(rng);
    }
    data.views.push_back(std::move(view));
  }
  return data;
}

}  // namespace cpcp
