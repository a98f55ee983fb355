#include "cpcp/graph.hpp"

#include "cpcp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>

namespace cpcp {

Metric parse_metric(std::string_view name) {
  if (name == "g" || name == "gauss" || name == "gaussian" || name == "euclidean")
    return Metric::EuclideanGaussian;
  if (name == "cos" || name == "cosine") return Metric::Cosine;
  throw ValidationError("unknown metric '" + std::string(name) +
                        "' (expected g|gaussian|euclidean|cos|cosine)");
}

std::string_view metric_name(Metric metric) {
  return metric == Metric::Cosine ? "cos" : "g";
}

void normalize_columns(Matrix& values) {
  for (Index c = 0; c < values.cols(); ++c) {
    auto col = values.col(c);
    col.array() -= col.mean();
    const double scale = col.cwiseAbs().maxCoeff();
    if (scale > 0.0) col /= scale;
  }
}

Index fill_blank_rows(Matrix& values, double scale) {
  Index touched = 0;
  for (Index i = 0; i < values.rows(); ++i) {
    if (!values.row(i).isZero(0.0)) continue;
    std::mt19937_64 rng(static_cast<std::uint64_t>(i));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (Index c = 0; c < values.cols(); ++c) values(i, c) = scale * unit(rng);
    ++touched;
  }
  return touched;
}

FeatureMatrix preprocess(FeatureMatrix features) {
  if (features.metric == Metric::EuclideanGaussian)
    normalize_columns(features.values);
  else
    fill_blank_rows(features.values);
  return features;
}

AffinityMatrix::AffinityMatrix(SparseMatrix weights) : weights_(std::move(weights)) {
  if (weights_.rows() != weights_.cols())
    throw ValidationError("affinity matrix must be square");
  weights_.makeCompressed();
  for (Index col = 0; col < weights_.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(weights_, col); it; ++it) {
      if (it.row() == it.col() && it.value() != 0.0)
        throw ValidationError("affinity matrix has a nonzero diagonal entry at " +
                              std::to_string(it.row()));
      if (!(it.value() >= 0.0) || !std::isfinite(it.value()))
        throw ValidationError("affinity matrix has a negative or non-finite entry");
      if (weights_.coeff(it.col(), it.row()) != it.value())
        throw ValidationError("affinity matrix is not symmetric at (" +
                              std::to_string(it.row()) + ", " + std::to_string(it.col()) + ")");
    }
  }
  degree_ = Vector::Zero(weights_.rows());
  for (Index col = 0; col < weights_.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(weights_, col); it; ++it) degree_(it.row()) += it.value();
}

AffinityMatrix affinity_from_dense(const Matrix& w) {
  std::vector<Triplet> entries;
  for (Index j = 0; j < w.cols(); ++j)
    for (Index i = 0; i < w.rows(); ++i)
      if (w(i, j) != 0.0) entries.emplace_back(i, j, w(i, j));
  SparseMatrix s(w.rows(), w.cols());
  s.setFromTriplets(entries.begin(), entries.end());
  return AffinityMatrix(std::move(s));
}

namespace {

void check_features(const FeatureMatrix& features, Index k) {
  const Index n = features.rows();
  if (n < 2) throw ValidationError("a view needs at least 2 instances");
  if (features.cols() < 1) throw ValidationError("a view needs at least 1 feature column");
  if (!features.values.allFinite()) throw ValidationError("feature matrix contains non-finite values");
  if (k < 1 || k >= n)
    throw ValidationError("neighbourhood size k = " + std::to_string(k) +
                          " must satisfy 1 <= k < n = " + std::to_string(n));
}

// Unit rows for cosine similarity; a zero row stays zero.
Matrix unit_rows(const Matrix& x) {
  Matrix out = x;
  for (Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (norm > 0.0) out.row(i) /= norm;
  }
  return out;
}

// Smaller key = closer neighbour.
Vector ranking_keys(const FeatureMatrix& features, const Matrix& units, Index i) {
  if (features.metric == Metric::Cosine) return -(units * units.row(i).transpose());
  return (features.values.rowwise() - features.values.row(i)).rowwise().squaredNorm();
}

}  // namespace

NeighborLists knn_lists(const FeatureMatrix& features, Index k) {
  check_features(features, k);
  const Index n = features.rows();
  const Matrix units = features.metric == Metric::Cosine ? unit_rows(features.values) : Matrix();
  NeighborLists lists(static_cast<std::size_t>(n));
  std::vector<Index> order(static_cast<std::size_t>(n - 1));
  for (Index i = 0; i < n; ++i) {
    const Vector key = ranking_keys(features, units, i);
    std::size_t pos = 0;
    for (Index j = 0; j < n; ++j)
      if (j != i) order[pos++] = j;
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Index a, Index b) {
      return key(a) < key(b) || (key(a) == key(b) && a < b);
    });
    lists[static_cast<std::size_t>(i)].assign(order.begin(), order.begin() + k);
  }
  return lists;
}

AffinityMatrix build_knn_affinity(const FeatureMatrix& features, Index k) {
  return build_knn_affinity(features, knn_lists(features, k));
}

AffinityMatrix build_knn_affinity(const FeatureMatrix& features, const NeighborLists& neighbors) {
  const Index n = features.rows();
  if (static_cast<Index>(neighbors.size()) != n)
    throw ValidationError("neighbour lists do not match the number of instances");

  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 0; i < n; ++i)
    for (Index j : neighbors[static_cast<std::size_t>(i)]) {
      if (j < 0 || j >= n || j == i) throw ValidationError("invalid neighbour index");
      edges.emplace_back(std::min(i, j), std::max(i, j));
    }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::vector<double> weight(edges.size());
  if (features.metric == Metric::Cosine) {
    const Matrix units = unit_rows(features.values);
    for (std::size_t e = 0; e < edges.size(); ++e)
      weight[e] = std::max(0.0, units.row(edges[e].first).dot(units.row(edges[e].second)));
  } else {
    std::vector<double> dist(edges.size());
    double total = 0.0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      dist[e] = (features.values.row(edges[e].first) - features.values.row(edges[e].second)).norm();
      total += dist[e];
    }
    const double bandwidth = edges.empty() ? 0.0 : total / static_cast<double>(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e)
      weight[e] = bandwidth > 0.0 ? std::exp(-dist[e] * dist[e] / (2.0 * bandwidth * bandwidth)) : 1.0;
  }

  std::vector<Triplet> entries;
  entries.reserve(2 * edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (weight[e] <= 0.0) continue;
    entries.emplace_back(edges[e].first, edges[e].second, weight[e]);
    entries.emplace_back(edges[e].second, edges[e].first, weight[e]);
  }
  SparseMatrix w(n, n);
  w.setFromTriplets(entries.begin(), entries.end());
  return AffinityMatrix(std::move(w));
}

SparseMatrix transition_matrix(const AffinityMatrix& w) {
  const Vector& degree = w.degree();
  for (Index i = 0; i < degree.size(); ++i)
    if (!(degree(i) > 0.0))
      throw DegenerateGraphError(i, "instance " + std::to_string(i) +
                                        " has zero degree; its transition row is undefined");
  SparseMatrix p = degree.cwiseInverse().asDiagonal() * w.weights();
  p.makeCompressed();
  return p;
}

Matrix transition_matrix(const Matrix& w) {
  const Vector degree = w.rowwise().sum();
  for (Index i = 0; i < degree.size(); ++i)
    if (!(degree(i) > 0.0))
      throw DegenerateGraphError(i, "instance " + std::to_string(i) +
                                        " has zero degree; its transition row is undefined");
  return degree.cwiseInverse().asDiagonal() * w;
}

namespace {

Vector normalized_degree(const Vector& degree) {
  const double total = degree.sum();
  if (!(total > 0.0)) throw DegenerateGraphError(0, "graph has zero total degree");
  return degree / total;
}

}  // namespace

Vector instance_probability(const AffinityMatrix& w) { return normalized_degree(w.degree()); }

Vector instance_probability(const Matrix& w) { return normalized_degree(w.rowwise().sum()); }

Matrix floored_affinity(const AffinityMatrix& w, double eps) {
  Matrix out = w.dense();
  out.array() += eps;
  out.diagonal().setZero();
  return out;
}

}  // namespace cpcp
