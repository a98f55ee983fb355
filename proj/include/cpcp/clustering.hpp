#pragma once

#include "cpcp/types.hpp"

#include <cstdint>
#include <vector>

namespace cpcp {

/// How the logistic scale of the final affinity is averaged.
enum class SigmaMode {
  AllEntries,      ///< mean |F| over all n^2 entries
  NonzeroEntries,  ///< mean |F| over nonzero entries only
};

double sigmoid_scale(const Matrix& f, SigmaMode mode = SigmaMode::AllEntries);

/// W*(i, j) = 1 / (1 + exp(-F(i, j) / sigma)) where F(i, j) > 0, else 0, with
/// a zero diagonal. Throws NumericalError when F carries no signal.
Matrix sigmoid_affinity(const Matrix& f, SigmaMode mode = SigmaMode::AllEntries);

/// Eigenvectors of I - D^-1/2 W D^-1/2 for the `dim` smallest eigenvalues,
/// rows scaled to unit length. Degrees are floored by kDefaultFloor. When the
/// dim-th eigenvalue is tied with the next one, the embedding stops at the
/// last gap below it.
struct SpectralEmbedding {
  Matrix rows;        ///< n x used dimensions
  Vector eigenvalues; ///< all Laplacian eigenvalues, ascending
  bool degenerate = false;  ///< tied eigenvalues at or below the cut-off
};
SpectralEmbedding spectral_embedding(const Matrix& affinity, Index dim);

struct KMeansResult {
  std::vector<int> labels;
  Matrix centers;
  double inertia = 0.0;
  int iterations = 0;
};

/// Lloyd iterations from k-means++ seeding.
KMeansResult kmeans(const Matrix& points, Index k, std::uint64_t seed, int max_iterations = 300);

struct SpectralOptions {
  Index clusters = 2;
  Index embed_dim = 0;  ///< 0 selects clusters + 1
  Index restarts = 10;
  std::uint64_t seed = 1;
  int max_iterations = 300;
};

struct ClusterAssignment {
  std::vector<int> labels;  ///< lowest-inertia restart
  std::vector<std::vector<int>> restart_labels;
  std::vector<double> restart_inertia;
  Vector eigenvalues;
  bool degenerate_spectrum = false;
};

/// Normalised spectral clustering. Restart r seeds k-means with seed + r.
/// Labels are renumbered in order of first appearance.
ClusterAssignment spectral_clustering(const Matrix& affinity, const SpectralOptions& options);

/// Renumbers labels in order of first appearance.
std::vector<int> canonical_labels(const std::vector<int>& labels);

}  // namespace cpcp
