#include "cpcp/eval.hpp"

#include "cpcp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

namespace cpcp {

namespace {

double entropy(const std::map<int, double>& counts, double total) {
  double h = 0.0;
  for (const auto& [label, c] : counts) {
    const double p = c / total;
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

bool same_partition(std::span<const int> a, std::span<const int> b) {
  std::map<int, int> forward, backward;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [f, fi] = forward.try_emplace(a[i], b[i]);
    auto [r, ri] = backward.try_emplace(b[i], a[i]);
    if (f->second != b[i] || r->second != a[i]) return false;
  }
  return true;
}

}  // namespace

double nmi(std::span<const int> pred, std::span<const int> truth, NmiNorm norm) {
  if (pred.size() != truth.size())
    throw ValidationError("label vectors differ in length: " + std::to_string(pred.size()) + " vs " +
                          std::to_string(truth.size()));
  if (pred.empty()) throw ValidationError("cannot score an empty labeling");

  const double total = static_cast<double>(pred.size());
  std::map<int, double> pa, pb;
  std::map<std::pair<int, int>, double> joint;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    pa[pred[i]] += 1.0;
    pb[truth[i]] += 1.0;
    joint[{pred[i], truth[i]}] += 1.0;
  }
  const double ha = entropy(pa, total);
  const double hb = entropy(pb, total);
  if (ha <= 0.0 || hb <= 0.0) return same_partition(pred, truth) ? 1.0 : 0.0;

  double mutual = 0.0;
  for (const auto& [key, c] : joint)
    mutual += (c / total) * std::log(c * total / (pa[key.first] * pb[key.second]));
  const double denom = norm == NmiNorm::Sqrt ? std::sqrt(ha * hb) : std::max(ha, hb);
  return std::clamp(mutual / denom, 0.0, 1.0);
}

bool is_single_label(const LabelSets& truth) {
  return std::all_of(truth.begin(), truth.end(), [](const auto& s) { return s.size() == 1; });
}

std::vector<int> first_labels(const LabelSets& truth) {
  std::vector<int> out;
  out.reserve(truth.size());
  for (const auto& set : truth) {
    if (set.empty()) throw ValidationError("every instance needs at least one label");
    out.push_back(*std::min_element(set.begin(), set.end()));
  }
  return out;
}

ExpandedLabels expand_multilabel(std::span<const int> pred, const LabelSets& truth) {
  if (pred.size() != truth.size())
    throw ValidationError("prediction and ground truth differ in length: " + std::to_string(pred.size()) +
                          " vs " + std::to_string(truth.size()));
  ExpandedLabels out;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i].empty()) throw ValidationError("instance " + std::to_string(i) + " has no label");
    for (int label : truth[i]) {
      out.pred.push_back(pred[i]);
      out.truth.push_back(label);
    }
  }
  return out;
}

double expanded_accuracy(std::span<const int> pred, const LabelSets& truth) {
  const ExpandedLabels e = expand_multilabel(pred, truth);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < e.pred.size(); ++i) hits += e.pred[i] == e.truth[i];
  return static_cast<double>(hits) / static_cast<double>(e.pred.size());
}

double ideal_multilabel_nmi(const LabelSets& truth, NmiNorm norm) {
  const std::vector<int> ideal = first_labels(truth);
  const ExpandedLabels e = expand_multilabel(ideal, truth);
  return nmi(e.pred, e.truth, norm);
}

double multilabel_nmi(std::span<const int> pred, const LabelSets& truth, NmiNorm norm) {
  const ExpandedLabels e = expand_multilabel(pred, truth);
  const double raw = nmi(e.pred, e.truth, norm);
  const double ideal = ideal_multilabel_nmi(truth, norm);
  if (!(ideal > 0.0)) return raw;
  return std::clamp(raw / ideal, 0.0, 1.0);
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) return {};
  Summary s;
  s.avg = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  s.max = *std::max_element(values.begin(), values.end());
  s.min = *std::min_element(values.begin(), values.end());
  return s;
}

std::string sweep_table(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "fraction\tavg\tmax\tmin\n";
  char buf[128];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%.6g\t%.6f\t%.6f\t%.6f\n", row.fraction, row.nmi.avg, row.nmi.max, row.nmi.min);
    out << buf;
  }
  return out.str();
}

nlohmann::json sweep_json(const std::vector<SweepRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : rows)
    out.push_back({{"fraction", row.fraction},
                   {"avg", row.nmi.avg},
                   {"max", row.nmi.max},
                   {"min", row.nmi.min},
                   {"trials", row.trials}});
  return out;
}

}  // namespace cpcp
