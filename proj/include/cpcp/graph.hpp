#pragma once

#include "cpcp/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cpcp {

enum class Metric { EuclideanGaussian, Cosine };

/// Accepts "g", "gauss", "gaussian", "euclidean" and "cos", "cosine".
Metric parse_metric(std::string_view name);
std::string_view metric_name(Metric metric);

/// One view of the data: n rows (instances) by d feature columns.
struct FeatureMatrix {
  Matrix values;
  Metric metric = Metric::EuclideanGaussian;

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
};

/// Centres every column and scales it into [-1, 1]. Constant columns become 0.
void normalize_columns(Matrix& values);

/// Replaces all-zero rows by tiny deterministic noise (magnitude `scale`)
/// seeded by the row index. Returns the number of rows touched.
Index fill_blank_rows(Matrix& values, double scale = 1e-6);

/// Applies the per-view preprocessing used by the pipeline: column
/// normalisation for euclidean views, blank-row noise for cosine views.
FeatureMatrix preprocess(FeatureMatrix features);

/// Symmetric, nonnegative, zero-diagonal sparse affinity with cached degrees.
class AffinityMatrix {
 public:
  AffinityMatrix() = default;

  /// Takes ownership of `weights`. Throws ValidationError if the matrix is not
  /// square, not symmetric, has a nonzero diagonal or a negative entry.
  explicit AffinityMatrix(SparseMatrix weights);

  Index size() const { return weights_.rows(); }
  const SparseMatrix& weights() const { return weights_; }
  const Vector& degree() const { return degree_; }
  double coeff(Index i, Index j) const { return weights_.coeff(i, j); }
  Matrix dense() const { return Matrix(weights_); }

 private:
  SparseMatrix weights_;
  Vector degree_;
};

/// Builds an AffinityMatrix from a dense symmetric matrix; entries equal to
/// zero are not stored.
AffinityMatrix affinity_from_dense(const Matrix& w);

using NeighborLists = std::vector<std::vector<Index>>;

/// Exact k nearest neighbours of every row, excluding the row itself, closest
/// first. Distance ties go to the lower index. Cosine views rank by
/// similarity.
NeighborLists knn_lists(const FeatureMatrix& features, Index k);

/// Union-symmetric k-NN graph. Gaussian views use exp(-d^2 / (2 s^2)) where s
/// is the mean length of the retained edges; cosine views use max(0, cos).
AffinityMatrix build_knn_affinity(const FeatureMatrix& features, Index k);

/// Same graph, reusing neighbour lists computed by knn_lists.
AffinityMatrix build_knn_affinity(const FeatureMatrix& features,
                                  const NeighborLists& neighbors);

/// Row-stochastic P with P(i,j) = W(i,j) / D(i). Throws DegenerateGraphError
/// on a zero-degree row.
SparseMatrix transition_matrix(const AffinityMatrix& w);
Matrix transition_matrix(const Matrix& w);

/// P(u_i | G) = D(i) / sum(D).
Vector instance_probability(const AffinityMatrix& w);
Vector instance_probability(const Matrix& w);

/// Dense copy of W with `eps` added to every off-diagonal entry.
Matrix floored_affinity(const AffinityMatrix& w, double eps);

}  // namespace cpcp
