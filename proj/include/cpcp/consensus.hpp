#pragma once

#include "cpcp/graph.hpp"
#include "cpcp/types.hpp"

#include <cstdint>

namespace cpcp {

/// Co-selection counts: entry (j, k) is the number of anchors whose
/// neighbour list contains both j and k.
using ConsensusMatrix = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Counts, for every anchor and every unordered pair {j, k} in its list, one
/// co-selection in both (j, k) and (k, j). Lists must hold distinct in-range
/// indices and must not contain their own anchor.
ConsensusMatrix consensus_matrix(const NeighborLists& neighbors);

/// Keeps W(i, j) where C(i, j) >= tau and drops it otherwise.
AffinityMatrix prune_affinity(const AffinityMatrix& dense, const ConsensusMatrix& counts, double tau);

/// Per-instance KL divergence between the dense and the pruned neighbour
/// distributions. Every entry of both rows is raised by `eps` before the rows
/// are normalised, so each row is a full-support distribution.
Vector consistency(const AffinityMatrix& dense, const AffinityMatrix& pruned,
                   double eps = kDefaultFloor);

/// round(n / c) clamped to [2, n - 1].
Index dense_neighborhood_size(Index n, Index clusters);

}  // namespace cpcp
