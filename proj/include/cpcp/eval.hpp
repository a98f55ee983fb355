#pragma once

#include <json.hpp>

#include <span>
#include <string>
#include <vector>

namespace cpcp {

enum class NmiNorm {
  Sqrt,  ///< I / sqrt(H(a) H(b))
  Max,   ///< I / max(H(a), H(b))
};

/// Normalised mutual information of two labelings of the same instances.
/// When either entropy vanishes the score is 1 for identical partitions and 0
/// otherwise.
double nmi(std::span<const int> pred, std::span<const int> truth, NmiNorm norm = NmiNorm::Sqrt);

/// Ground truth with one or more labels per instance.
using LabelSets = std::vector<std::vector<int>>;

bool is_single_label(const LabelSets& truth);
std::vector<int> first_labels(const LabelSets& truth);

/// One copy per (instance, true label) pair; the prediction is repeated.
struct ExpandedLabels {
  std::vector<int> pred;
  std::vector<int> truth;
};
ExpandedLabels expand_multilabel(std::span<const int> pred, const LabelSets& truth);

/// Fraction of expanded copies whose predicted label equals the true label.
/// Meaningful only when predictions use the ground-truth alphabet.
double expanded_accuracy(std::span<const int> pred, const LabelSets& truth);

/// NMI of the best single-label prediction (each instance predicted as its
/// lowest label) under the expansion.
double ideal_multilabel_nmi(const LabelSets& truth, NmiNorm norm = NmiNorm::Sqrt);

/// Expanded NMI divided by ideal_multilabel_nmi.
double multilabel_nmi(std::span<const int> pred, const LabelSets& truth, NmiNorm norm = NmiNorm::Sqrt);

struct Summary {
  double avg = 0.0;
  double max = 0.0;
  double min = 0.0;
};
Summary summarize(std::span<const double> values);

struct SweepRow {
  double fraction = 0.0;
  Summary nmi;
  std::vector<double> trials;
};

/// Tab-separated "fraction avg max min" table with a header line.
std::string sweep_table(const std::vector<SweepRow>& rows);
nlohmann::json sweep_json(const std::vector<SweepRow>& rows);

}  // namespace cpcp
