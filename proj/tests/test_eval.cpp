#include "cpcp/errors.hpp"
#include "cpcp/eval.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>
#include <vector>

using namespace cpcp;
using namespace cpcp::test;

namespace {

// Contingency-table NMI with square-root normalisation, labels in [0, 10).
double nmi_oracle(const std::vector<int>& a, const std::vector<int>& b) {
  const double n = static_cast<double>(a.size());
  double table[10][10] = {};
  double ra[10] = {}, rb[10] = {};
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[a[i]][b[i]] += 1.0;
    ra[a[i]] += 1.0;
    rb[b[i]] += 1.0;
  }
  double mi = 0.0, ha = 0.0, hb = 0.0;
  for (int x = 0; x < 10; ++x) {
    if (ra[x] > 0) ha -= ra[x] / n * std::log(ra[x] / n);
    if (rb[x] > 0) hb -= rb[x] / n * std::log(rb[x] / n);
    for (int y = 0; y < 10; ++y)
      if (table[x][y] > 0) mi += table[x][y] / n * std::log(table[x][y] * n / (ra[x] * rb[y]));
  }
  return mi / std::sqrt(ha * hb);
}

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
  return true;
}

std::vector<int> random_labels(Rng& rng, std::size_t n, int k) {
  std::vector<int> out(n);
  for (int& v : out) v = static_cast<int>(uniform_index(rng, 0, k - 1));
  return out;
}

}  // namespace

TEST_CASE("nmi reference values") {
  const std::vector<int> truth{0, 0, 1, 1, 2, 2};
  CHECK(nmi(truth, truth) == 1.0);
  CHECK(nmi(std::vector<int>{5, 5, 3, 3, 9, 9}, truth) == 1.0);
  CHECK(nmi(std::vector<int>(6, 0), truth) == 0.0);
  CHECK(nmi(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 1, 0, 1}) == 0.0);
  CHECK(nmi(std::vector<int>(4, 1), std::vector<int>(4, 7)) == 1.0);
  CHECK_THROWS_AS(nmi(std::vector<int>{0, 1}, std::vector<int>{0}), ValidationError);
  CHECK_THROWS_AS(nmi(std::vector<int>{}, std::vector<int>{}), ValidationError);
}

TEST_CASE("nmi matches a contingency-table oracle and its properties") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = static_cast<std::size_t>(uniform_index(rng, 2, 40));
    std::vector<int> a = random_labels(rng, n, static_cast<int>(uniform_index(rng, 2, 5)));
    std::vector<int> b = trial % 4 == 0 ? a : random_labels(rng, n, static_cast<int>(uniform_index(rng, 2, 5)));
    if (trial % 8 == 0)
      for (int& v : b) v = (v + 3) % 10;
    const double score = nmi(a, b);
    CHECK(score >= 0.0);
    CHECK(score <= 1.0);
    CHECK(std::abs(score - nmi(b, a)) <= 1e-12);
    std::vector<int> renamed = a;
    for (int& v : renamed) v = 9 - v;
    CHECK(std::abs(nmi(renamed, b) - score) <= 1e-12);

    std::map<int, int> ka, kb;
    for (int v : a) ++ka[v];
    for (int v : b) ++kb[v];
    if (ka.size() > 1 && kb.size() > 1) CHECK(std::abs(score - std::min(1.0, nmi_oracle(a, b))) <= 1e-12);
    CHECK((std::abs(score - 1.0) <= 1e-12) == same_partition(a, b));

    const double by_max = nmi(a, b, NmiNorm::Max);
    CHECK(by_max <= score + 1e-12);
  }
}

TEST_CASE("multi-label expansion counts one hit out of three copies") {
  const LabelSets truth{{0, 1, 2}};
  CHECK(expanded_accuracy(std::vector<int>{0}, truth) == 1.0 / 3.0);
  const ExpandedLabels e = expand_multilabel(std::vector<int>{0}, truth);
  CHECK(e.pred == std::vector<int>{0, 0, 0});
  CHECK(e.truth == std::vector<int>{0, 1, 2});
}

TEST_CASE("multi-label score reduces to nmi on single-label truth") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = static_cast<std::size_t>(uniform_index(rng, 2, 30));
    const std::vector<int> t = random_labels(rng, n, 3), p = random_labels(rng, n, 4);
    LabelSets truth;
    for (int v : t) truth.push_back({v});
    CHECK(is_single_label(truth));
    CHECK(std::abs(multilabel_nmi(p, truth) - nmi(p, t)) <= 1e-12);
  }
}

TEST_CASE("the ideal multi-label prediction scores one") {
  const LabelSets truth{{0}, {0, 1}, {1}, {1, 2}, {2}, {0, 2}, {2}, {1}};
  CHECK(!is_single_label(truth));
  const std::vector<int> ideal = first_labels(truth);
  CHECK(ideal == std::vector<int>{0, 0, 1, 1, 2, 0, 2, 1});
  const ExpandedLabels e = expand_multilabel(ideal, truth);
  const double ideal_score = nmi(e.pred, e.truth);
  CHECK(ideal_score < 1.0);
  CHECK(ideal_multilabel_nmi(truth) == ideal_score);
  CHECK(multilabel_nmi(ideal, truth) == 1.0);
  const std::vector<int> poor{0, 1, 2, 0, 1, 2, 0, 1};
  const ExpandedLabels ep = expand_multilabel(poor, truth);
  CHECK(std::abs(multilabel_nmi(poor, truth) - nmi(ep.pred, ep.truth) / ideal_score) <= 1e-12);
  CHECK_THROWS_AS(expand_multilabel(std::vector<int>{0}, truth), ValidationError);
  CHECK_THROWS_AS(first_labels(LabelSets{{}}), ValidationError);
}

TEST_CASE("summaries and sweep tables") {
  const std::vector<double> one{0.5};
  const Summary s1 = summarize(one);
  CHECK(s1.avg == 0.5);
  CHECK(s1.max == 0.5);
  CHECK(s1.min == 0.5);
  const std::vector<double> many{0.2, 0.9, 0.4};
  const Summary s = summarize(many);
  CHECK(s.min <= s.avg);
  CHECK(s.avg <= s.max);
  CHECK(s.avg == doctest::Approx(0.5));

  std::vector<SweepRow> rows;
  for (int k = 1; k <= 8; ++k) rows.push_back({0.0001 * k, s, many});
  const std::string table = sweep_table(rows);
  std::istringstream in(table);
  std::string header, line;
  std::getline(in, header);
  CHECK(header == "fraction\tavg\tmax\tmin");
  int count = 0;
  while (std::getline(in, line)) ++count;
  CHECK(count == 8);
  const nlohmann::json j = sweep_json(rows);
  CHECK(j.size() == 8);
  CHECK(j[0]["trials"].size() == 3);
  CHECK(j[7]["fraction"].get<double>() == doctest::Approx(0.0008));
}
