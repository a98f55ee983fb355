#include "cpcp/consensus.hpp"

#include "cpcp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace cpcp {

ConsensusMatrix consensus_matrix(const NeighborLists& neighbors) {
  const Index n = static_cast<Index>(neighbors.size());
  ConsensusMatrix counts = ConsensusMatrix::Zero(n, n);
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (Index anchor = 0; anchor < n; ++anchor) {
    const auto& list = neighbors[static_cast<std::size_t>(anchor)];
    for (Index j : list) {
      if (j < 0 || j >= n)
        throw ValidationError("neighbour index " + std::to_string(j) + " out of range in list of " +
                              std::to_string(anchor));
      if (j == anchor)
        throw ValidationError("instance " + std::to_string(anchor) + " appears in its own neighbour list");
      if (seen[static_cast<std::size_t>(j)])
        throw ValidationError("duplicate neighbour " + std::to_string(j) + " in list of " +
                              std::to_string(anchor));
      seen[static_cast<std::size_t>(j)] = 1;
    }
    for (Index j : list) seen[static_cast<std::size_t>(j)] = 0;

    for (std::size_t a = 0; a < list.size(); ++a)
      for (std::size_t b = a + 1; b < list.size(); ++b) {
        ++counts(list[a], list[b]);
        ++counts(list[b], list[a]);
      }
  }
  return counts;
}

AffinityMatrix prune_affinity(const AffinityMatrix& dense, const ConsensusMatrix& counts, double tau) {
  if (counts.rows() != dense.size() || counts.cols() != dense.size())
    throw ValidationError("consensus matrix and affinity have different shapes");
  if (!(tau >= 0.0)) throw ValidationError("consensus threshold tau must be nonnegative");
  SparseMatrix kept = dense.weights();
  kept.prune([&](Index i, Index j, double) { return static_cast<double>(counts(i, j)) >= tau; });
  return AffinityMatrix(std::move(kept));
}

Vector consistency(const AffinityMatrix& dense, const AffinityMatrix& pruned, double eps) {
  const Index n = dense.size();
  if (pruned.size() != n) throw ValidationError("dense and pruned affinities have different shapes");
  if (!(eps > 0.0)) throw ValidationError("floor eps must be positive");

  const Matrix p_rows = dense.dense();
  const Matrix q_rows = pruned.dense();
  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    const double p_total = p_rows.row(i).sum() + static_cast<double>(n) * eps;
    const double q_total = q_rows.row(i).sum() + static_cast<double>(n) * eps;
    double kl = 0.0;
    for (Index j = 0; j < n; ++j) {
      const double p = (p_rows(i, j) + eps) / p_total;
      const double q = (q_rows(i, j) + eps) / q_total;
      kl += p * std::log(p / q);
    }
    out(i) = std::max(kl, 0.0);
  }
  return out;
}

Index dense_neighborhood_size(Index n, Index clusters) {
  if (clusters < 1) throw ValidationError("cluster count must be positive");
  const Index k = static_cast<Index>(std::llround(static_cast<double>(n) / static_cast<double>(clusters)));
  return std::min(std::max<Index>(k, 2), n - 1);
}

}  // namespace cpcp
