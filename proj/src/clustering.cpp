#include "cpcp/clustering.hpp"

#include "cpcp/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

namespace cpcp {

double sigmoid_scale(const Matrix& f, SigmaMode mode) {
  if (f.size() == 0) return 0.0;
  const double total = f.cwiseAbs().sum();
  if (mode == SigmaMode::AllEntries) return total / static_cast<double>(f.size());
  const auto nonzero = (f.array() != 0.0).count();
  return nonzero == 0 ? 0.0 : total / static_cast<double>(nonzero);
}

Matrix sigmoid_affinity(const Matrix& f, SigmaMode mode) {
  if (!f.allFinite()) throw NumericalError("propagation result contains non-finite values");
  const double sigma = sigmoid_scale(f, mode);
  if (!(sigma > 0.0))
    throw NumericalError("propagation produced no signal (F is identically zero); supply constraints");
  Matrix out = f.unaryExpr([sigma](double v) { return v > 0.0 ? 1.0 / (1.0 + std::exp(-v / sigma)) : 0.0; });
  out.diagonal().setZero();
  return out;
}

namespace {

constexpr double kTieTolerance = 1e-10;

}  // namespace

SpectralEmbedding spectral_embedding(const Matrix& affinity, Index dim) {
  const Index n = affinity.rows();
  if (affinity.cols() != n) throw ValidationError("affinity must be square");
  if (dim < 1) throw ValidationError("embedding dimension must be positive");
  dim = std::min(dim, n);

  const Vector inv_sqrt = (affinity.rowwise().sum().array() + kDefaultFloor).rsqrt();
  Matrix normalized = inv_sqrt.asDiagonal() * affinity * inv_sqrt.asDiagonal();
  normalized = 0.5 * (normalized + normalized.transpose());
  const Eigen::SelfAdjointEigenSolver<Matrix> solver(normalized);
  if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition of the Laplacian failed");

  // Largest eigenvalues of the normalised affinity are the smallest of the Laplacian.
  SpectralEmbedding out;
  out.eigenvalues = (1.0 - solver.eigenvalues().reverse().array()).matrix();
  // A cut-off inside a tied eigenvalue group picks an arbitrary basis of that
  // eigenspace; stop at the last gap below it instead.
  Index used = dim;
  while (used > 1 && used < n && out.eigenvalues(used) - out.eigenvalues(used - 1) <= kTieTolerance) --used;
  if (used == 1 && n > 1 && out.eigenvalues(1) - out.eigenvalues(0) <= kTieTolerance) used = dim;
  out.rows = solver.eigenvectors().rightCols(used).rowwise().reverse();
  for (Index i = 0; i < n; ++i) {
    const double norm = out.rows.row(i).norm();
    if (norm > 0.0) out.rows.row(i) /= norm;
  }
  Index distinct = 1;
  for (Index i = 1; i < out.eigenvalues.size(); ++i)
    if (out.eigenvalues(i) - out.eigenvalues(i - 1) > kTieTolerance) ++distinct;
  out.degenerate = distinct < dim || used < dim;
  return out;
}

KMeansResult kmeans(const Matrix& points, Index k, std::uint64_t seed, int max_iterations) {
  const Index n = points.rows();
  if (k < 1 || k > n) throw ValidationError("k-means needs 1 <= k <= n");
  std::mt19937_64 rng(seed);

  KMeansResult out;
  out.centers.resize(k, points.cols());
  std::uniform_int_distribution<Index> first(0, n - 1);
  out.centers.row(0) = points.row(first(rng));
  Vector nearest = (points.rowwise() - out.centers.row(0)).rowwise().squaredNorm();
  for (Index c = 1; c < k; ++c) {
    const double total = nearest.sum();
    Index chosen = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> unit(0.0, total);
      double target = unit(rng);
      chosen = n - 1;
      for (Index i = 0; i < n; ++i) {
        target -= nearest(i);
        if (target < 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = first(rng);
    }
    out.centers.row(c) = points.row(chosen);
    nearest = nearest.cwiseMin((points.rowwise() - out.centers.row(c)).rowwise().squaredNorm());
  }

  out.labels.assign(static_cast<std::size_t>(n), -1);
  Vector distance(n);
  for (out.iterations = 1; out.iterations <= max_iterations; ++out.iterations) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      Index best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Index c = 0; c < k; ++c) {
        const double d = (points.row(i) - out.centers.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      distance(i) = best_d;
      if (out.labels[static_cast<std::size_t>(i)] != static_cast<int>(best)) {
        out.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
        changed = true;
      }
    }
    if (!changed) break;

    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      sums.row(out.labels[static_cast<std::size_t>(i)]) += points.row(i);
      ++sizes[static_cast<std::size_t>(out.labels[static_cast<std::size_t>(i)])];
    }
    for (Index c = 0; c < k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) {
        out.centers.row(c) = sums.row(c) / static_cast<double>(sizes[static_cast<std::size_t>(c)]);
      } else {
        // Empty cluster: move it onto the worst-served point.
        Index far = 0;
        distance.maxCoeff(&far);
        out.centers.row(c) = points.row(far);
        distance(far) = 0.0;
      }
    }
  }
  out.iterations = std::min(out.iterations, max_iterations);
  out.inertia = 0.0;
  for (Index i = 0; i < n; ++i)
    out.inertia += (points.row(i) - out.centers.row(out.labels[static_cast<std::size_t>(i)])).squaredNorm();
  return out;
}

std::vector<int> canonical_labels(const std::vector<int>& labels) {
  std::map<int, int> rename;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int label : labels) {
    auto [it, inserted] = rename.try_emplace(label, static_cast<int>(rename.size()));
    out.push_back(it->second);
  }
  return out;
}

ClusterAssignment spectral_clustering(const Matrix& affinity, const SpectralOptions& options) {
  if (options.clusters < 2) throw ValidationError("spectral clustering needs at least 2 clusters");
  if (options.clusters > affinity.rows()) throw ValidationError("more clusters than instances");
  if (options.restarts < 1) throw ValidationError("at least one k-means restart is required");
  if ((affinity.array() < 0.0).any()) throw ValidationError("affinity must be nonnegative");

  const Index dim = options.embed_dim > 0 ? options.embed_dim : options.clusters + 1;
  const SpectralEmbedding embedding = spectral_embedding(affinity, dim);

  ClusterAssignment out;
  out.eigenvalues = embedding.eigenvalues;
  out.degenerate_spectrum = embedding.degenerate;
  double best = std::numeric_limits<double>::infinity();
  for (Index r = 0; r < options.restarts; ++r) {
    KMeansResult run = kmeans(embedding.rows, options.clusters, options.seed + static_cast<std::uint64_t>(r),
                              options.max_iterations);
    out.restart_labels.push_back(canonical_labels(run.labels));
    out.restart_inertia.push_back(run.inertia);
    if (run.inertia < best) {
      best = run.inertia;
      out.labels = out.restart_labels.back();
    }
  }
  return out;
}

}  // namespace cpcp
