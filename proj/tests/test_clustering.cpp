#include "cpcp/clustering.hpp"
#include "cpcp/errors.hpp"
#include "cpcp/eval.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

using namespace cpcp;
using namespace cpcp::test;

namespace {

Matrix planted_blocks(Rng& rng, Index n, Index blocks, double inside, double outside) {
  Matrix w(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j) {
      const bool same = i % blocks == j % blocks;
      w(i, j) = w(j, i) = same ? uniform(rng, inside, 1.0) : uniform(rng, 0.0, outside);
    }
  w.diagonal().setZero();
  return w;
}

std::vector<int> truth_of(Index n, Index blocks) {
  std::vector<int> t(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = static_cast<int>(i % blocks);
  return t;
}

}  // namespace

TEST_CASE("an entry equal to the scale maps to the logistic of one") {
  const Matrix f = Matrix::Constant(4, 4, 0.37);
  const Matrix w = sigmoid_affinity(f);
  CHECK(w(0, 1) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-15));
  CHECK(w(0, 1) == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(w.diagonal().isZero(0.0));
}

TEST_CASE("nonpositive propagation entries give zero affinity") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = uniform_index(rng, 3, 20);
    Matrix f = random_matrix(rng, n, n, -1.0, 1.0);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < i; ++j) f(i, j) = f(j, i) = uniform(rng, 0.0, 1.0) < 0.1 ? 0.0 : f(j, i);
    f.diagonal().setZero();
    const Matrix w = sigmoid_affinity(f);
    CHECK((w.array() == 0.0).count() == (f.array() <= 0.0).count());
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        if (f(i, j) > 0.0) {
          CHECK(w(i, j) > 0.5);
          CHECK(w(i, j) < 1.0);
        } else {
          CHECK(w(i, j) == 0.0);
        }
      }
    CHECK(w == w.transpose());
  }
}

TEST_CASE("sigmoid affinity is monotone and scale free") {
  Rng rng(5);
  const Matrix f = random_matrix(rng, 12, 12, -1.0, 1.0);
  const Matrix w = sigmoid_affinity(f);
  for (Index a = 0; a < f.size(); ++a)
    for (Index b = 0; b < f.size(); ++b) {
      const Index ia = a % 12, ja = a / 12, ib = b % 12, jb = b / 12;
      if (ia == ja || ib == jb) continue;
      if (f(ia, ja) > f(ib, jb) && f(ib, jb) > 0.0) CHECK(w(ia, ja) > w(ib, jb));
    }
  for (double c : {1e-6, 0.3, 7.0, 1e5}) {
    CHECK(max_abs(sigmoid_affinity(c * f) - w) <= 1e-12);
    CHECK(max_abs(sigmoid_affinity(c * f, SigmaMode::NonzeroEntries) - sigmoid_affinity(f, SigmaMode::NonzeroEntries)) <=
          1e-12);
  }
}

TEST_CASE("sigmoid scale modes") {
  Matrix f = Matrix::Zero(2, 2);
  f(0, 1) = 2.0;
  f(1, 0) = -1.0;
  CHECK(sigmoid_scale(f) == 0.75);
  CHECK(sigmoid_scale(f, SigmaMode::NonzeroEntries) == 1.5);
  CHECK_THROWS_AS(sigmoid_affinity(Matrix::Zero(3, 3)), NumericalError);
}

TEST_CASE("two disconnected cliques are recovered exactly") {
  Matrix w = Matrix::Zero(10, 10);
  for (Index i = 0; i < 10; ++i)
    for (Index j = 0; j < 10; ++j)
      if (i != j && (i < 5) == (j < 5)) w(i, j) = 1.0;
  const SpectralEmbedding e = spectral_embedding(w, 3);
  CHECK(e.rows.cols() == 2);
  CHECK(e.degenerate);
  SpectralOptions options;
  options.clusters = 2;
  const ClusterAssignment a = spectral_clustering(w, options);
  std::vector<int> truth(10);
  for (int i = 0; i < 10; ++i) truth[i] = i < 5 ? 0 : 1;
  CHECK(nmi(a.labels, truth) == 1.0);
  for (const auto& r : a.restart_labels) CHECK(nmi(r, truth) == 1.0);
}

TEST_CASE("spectral clustering is equivariant under permutation and deterministic") {
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const Index n = 45;
    const Matrix w = planted_blocks(rng, n, 3, 0.6, 0.1);
    std::vector<Index> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix permuted(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) permuted(i, j) = w(perm[i], perm[j]);

    SpectralOptions options;
    options.clusters = 3;
    options.seed = 11;
    const ClusterAssignment a = spectral_clustering(w, options);
    const ClusterAssignment b = spectral_clustering(permuted, options);
    std::vector<int> back(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) back[static_cast<std::size_t>(perm[i])] = b.labels[static_cast<std::size_t>(i)];
    CHECK(nmi(canonical_labels(back), a.labels) == 1.0);
    CHECK(nmi(a.labels, truth_of(n, 3)) == 1.0);

    const ClusterAssignment again = spectral_clustering(w, options);
    CHECK(again.labels == a.labels);
    CHECK(again.restart_inertia == a.restart_inertia);
  }
}

TEST_CASE("normalised Laplacian eigenvalues lie in [0, 2]") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = uniform_index(rng, 3, 40);
    const Matrix w = planted_blocks(rng, n, uniform_index(rng, 1, 4), 0.0, 1.0);
    const SpectralEmbedding e = spectral_embedding(w, 2);
    CHECK(e.eigenvalues.minCoeff() >= -1e-8);
    CHECK(e.eigenvalues.maxCoeff() <= 2.0 + 1e-8);
    CHECK(std::is_sorted(e.eigenvalues.data(), e.eigenvalues.data() + e.eigenvalues.size()));
    for (Index i = 0; i < n; ++i) CHECK(std::abs(e.rows.row(i).norm() - 1.0) <= 1e-12);
  }
}

TEST_CASE("degenerate spectra are flagged, not fatal") {
  const Matrix w = Matrix::Zero(6, 6);
  SpectralOptions options;
  options.clusters = 2;
  const ClusterAssignment a = spectral_clustering(w, options);
  CHECK(a.degenerate_spectrum);
  CHECK(a.labels.size() == 6);
}

TEST_CASE("restart bookkeeping keeps the lowest inertia") {
  Rng rng(17);
  const Matrix w = planted_blocks(rng, 30, 3, 0.3, 0.25);
  SpectralOptions options;
  options.clusters = 3;
  options.restarts = 7;
  const ClusterAssignment a = spectral_clustering(w, options);
  REQUIRE(a.restart_labels.size() == 7);
  REQUIRE(a.restart_inertia.size() == 7);
  const auto best = std::min_element(a.restart_inertia.begin(), a.restart_inertia.end()) - a.restart_inertia.begin();
  CHECK(a.labels == a.restart_labels[static_cast<std::size_t>(best)]);
  for (const auto& labels : a.restart_labels) {
    CHECK(labels == canonical_labels(labels));
    CHECK(*std::max_element(labels.begin(), labels.end()) < 3);
  }
}

TEST_CASE("k-means separates distant groups") {
  Matrix points(6, 2);
  points << 0, 0, 0.1, 0, 0, 0.1, 10, 10, 10.1, 10, 10, 10.1;
  const KMeansResult r = kmeans(points, 2, 5);
  CHECK(r.labels[0] == r.labels[1]);
  CHECK(r.labels[0] == r.labels[2]);
  CHECK(r.labels[3] == r.labels[4]);
  CHECK(r.labels[0] != r.labels[3]);
  CHECK(r.inertia == doctest::Approx(4.0 * 0.1 * 0.1 * 2.0 / 3.0).epsilon(1e-9));
  CHECK_THROWS_AS(kmeans(points, 7, 1), ValidationError);
  CHECK_THROWS_AS(kmeans(points, 0, 1), ValidationError);
}

TEST_CASE("canonical labels follow first appearance") {
  CHECK(canonical_labels({2, 2, 0, 1, 0}) == std::vector<int>{0, 0, 1, 2, 1});
  CHECK(canonical_labels({}).empty());
}

TEST_CASE("spectral clustering validates its options") {
  const Matrix w = Matrix::Ones(4, 4) - Matrix::Identity(4, 4);
  SpectralOptions options;
  options.clusters = 1;
  CHECK_THROWS_AS(spectral_clustering(w, options), ValidationError);
  options.clusters = 5;
  CHECK_THROWS_AS(spectral_clustering(w, options), ValidationError);
  options.clusters = 2;
  options.restarts = 0;
  CHECK_THROWS_AS(spectral_clustering(w, options), ValidationError);
  options.restarts = 1;
  Matrix negative = w;
  negative(0, 1) = -1.0;
  CHECK_THROWS_AS(spectral_clustering(negative, options), ValidationError);
}
