#pragma once

#include "cpcp/clustering.hpp"
#include "cpcp/eval.hpp"
#include "cpcp/graph.hpp"
#include "cpcp/prior.hpp"
#include "cpcp/propagation.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cpcp {

enum class Method {
  Cpcp,      ///< consensus prior fusion + balanced propagation
  Mmcp,      ///< multi-modal propagation with manual view priors
  MmcpSw,    ///< multi-modal propagation with equal view priors
  E2cp,      ///< per-view propagation, adjusted affinities averaged
  Baseline,  ///< spectral clustering of the averaged view graphs, no constraints
};

Method parse_method(std::string_view name);
std::string_view method_name(Method method);

struct MultiViewDataset {
  std::vector<FeatureMatrix> views;
  LabelSets labels;  ///< empty when no ground truth is available

  Index size() const { return views.empty() ? 0 : views.front().rows(); }
};

/// Every knob of a run. Zero for k_final, k_dense or embed_dim selects the
/// data-dependent default.
struct PipelineConfig {
  Method method = Method::Cpcp;
  std::vector<std::string> views;
  std::vector<Metric> metrics;  ///< empty means gaussian for every view
  std::string labels;
  std::string constraints;
  double budget = 0.0;
  Index clusters = 0;
  double eta = kDefaultEta;
  double tau = -1.0;  ///< negative selects round(kDefaultTauFraction * k_dense)
  double eps = kDefaultFloor;
  Index k_final = 0;
  Index k_dense = 0;
  Index embed_dim = 0;
  Index restarts = 10;
  std::uint64_t seed = 1;
  std::vector<double> prior;  ///< manual P(G_s), mmcp only
  SigmaMode sigma_mode = SigmaMode::AllEntries;
  NmiNorm nmi_norm = NmiNorm::Sqrt;
  bool dump_prior = false;
  std::string out;  ///< output directory; not part of the echo

  /// Flat key=value text under a [section] header; keys match the CLI flags.
  std::string to_ini(std::string_view section = "run") const;
};

/// Automatic consensus threshold as a fraction of the dense neighbourhood.
inline constexpr double kDefaultTauFraction = 0.3;

struct ResolvedParameters {
  double tau = 1.0;
  Index k_final = 0;
  Index k_dense = 0;
  Index embed_dim = 0;
};

/// round(log2(n / c)), at least 1 and at most n - 1.
Index default_k_final(Index n, Index clusters);
ResolvedParameters resolve_parameters(const PipelineConfig& config, Index n);

/// Reads the view, metric and label files named in the config.
MultiViewDataset load_dataset(const PipelineConfig& config);

/// Constraint-independent state of a method: fused graphs and priors.
struct PreparedModel {
  Method method = Method::Cpcp;
  Index n = 0;
  ResolvedParameters params;
  std::vector<Matrix> view_affinities;  ///< k_final graphs (dense), baselines
  std::optional<ViewPrior> prior;
  std::optional<UnifiedGraph> unified;
  std::optional<MmcpGraph> mmcp;
  Vector graph_marginal;
  std::vector<std::string> warnings;
};

PreparedModel prepare_model(const PipelineConfig& config, const MultiViewDataset& data);

/// Refined view affinity: 1 - (1 - W)(1 - F) where F >= 0 and (1 + F) W
/// where F < 0, with F clipped to [-1, 1].
Matrix e2cp_adjust(const Matrix& affinity, const Matrix& f);

/// Element-wise mean of per-view affinities.
Matrix fuse_e2cp(std::span<const Matrix> affinities);

struct RunOutcome {
  ClusterAssignment assignment;
  double balance_alpha = 1.0;
  std::size_t must_links = 0;
  std::size_t cannot_links = 0;
  std::vector<double> restart_nmi;  ///< empty without ground truth
  Summary nmi;
  std::vector<std::string> warnings;
};

/// Propagates `constraints` through a prepared model and clusters the result.
RunOutcome solve(const PreparedModel& model, const PipelineConfig& config, const ConstraintSet& constraints,
                 const LabelSets& truth);

/// Reads the constraints file, or samples `config.budget` of all pairs from
/// the labels using `seed`. Multi-label truth is sampled on each instance's
/// lowest label.
ConstraintSet resolve_constraints(const PipelineConfig& config, const MultiViewDataset& data,
                                  std::uint64_t seed);

struct RunReport {
  nlohmann::json report;
  ClusterAssignment assignment;
  PreparedModel model;
};

/// Full run on an in-memory dataset.
RunReport run_pipeline(const PipelineConfig& config, const MultiViewDataset& data,
                       const ConstraintSet& constraints);

/// Loads files, runs, and writes report.json, assignments.txt,
/// view_marginals.tsv, restarts.tsv and config.ini into config.out when set.
RunReport run_pipeline(const PipelineConfig& config);

void write_run_outputs(const std::filesystem::path& dir, const PipelineConfig& config, const RunReport& run);

/// Runs `repeats` seeded trials per budget fraction. Trial t of fraction f
/// samples constraints with seed + 1000 f + t; its score is the mean NMI over
/// k-means restarts.
std::vector<SweepRow> run_sweep(const PipelineConfig& config, const MultiViewDataset& data,
                                std::span<const double> fractions, Index repeats);

struct SelectionStep {
  std::vector<Index> views;  ///< indices into the initial view list
  Vector graph_marginal;
  Summary nmi;
  Index eliminated = -1;
};

/// Repeatedly runs CPCP, records the marginals P(G_s) and NMI, and drops the
/// view with the smallest marginal (lowest index on ties) until one is left.
std::vector<SelectionStep> view_selection(const PipelineConfig& config, const MultiViewDataset& data,
                                          const ConstraintSet& constraints);

nlohmann::json selection_json(const std::vector<SelectionStep>& steps, const std::vector<std::string>& names);
std::string selection_table(const std::vector<SelectionStep>& steps);

struct SyntheticView {
  Index dim = 5;
  double spread = 1.0;  ///< blob standard deviation
  bool noise = false;   ///< uniform noise in [-1, 1], no cluster structure
  Metric metric = Metric::EuclideanGaussian;
};

struct SyntheticSpec {
  Index n = 300;
  Index clusters = 3;
  double separation = 3.0;  ///< standard deviation of the cluster centres
  std::vector<SyntheticView> views;
  std::uint64_t seed = 1;
};

/// Gaussian blobs per view around independently drawn centres; instance i
/// belongs to cluster i mod clusters.
MultiViewDataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace cpcp
