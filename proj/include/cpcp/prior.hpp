#pragma once

#include "cpcp/graph.hpp"
#include "cpcp/types.hpp"

#include <span>
#include <vector>

namespace cpcp {

/// Per-view conditionals estimated independently of each other. Both
/// matrices are n x S (instances by views).
struct PseudoConditionals {
  Matrix graph_given_instance;  ///< P(G_s | u_i), rows sum to 1
  Matrix instance_given_graph;  ///< P(u_i | G_s), columns sum to 1
};

/// P(G_s | u_i) proportional to 1 / (c_s(i) + 1), normalised over views.
/// `consistencies` is n x S.
Matrix pseudo_graph_prior(const Matrix& consistencies);

/// Q(i, s) = P(u_i | G_s) / P(G_s | u_i).
Matrix quotient_matrix(const PseudoConditionals& pc);

/// Leading singular pair of a positive quotient matrix, expressed as the
/// factorisation Q_hat = m n^T with sum(m) = 1.
struct QuotientFactor {
  Matrix q_hat;
  Vector m;                   ///< equals P(u)
  Vector n;                   ///< per-view factor
  Vector instance_marginal;   ///< P(u_i) = m_i
  Vector graph_marginal;      ///< P(G_s) proportional to 1 / n_s, sums to 1
  double singular_value = 0.0;
  int iterations = 0;
};

/// Best rank-1 approximation in Frobenius norm, by power iteration on Q^T Q
/// (tolerance 1e-12, at most 10^4 steps).
QuotientFactor rank1_approximate(const Matrix& q);

/// Minimiser of qp_alpha/2 (x_u - a)^2 + qp_beta/2 (x_g - b)^2 subject to
/// x_u = q x_g.
struct ReconciledPair {
  double instance_given_graph;
  double graph_given_instance;
};
ReconciledPair reconcile_element(double a, double b, double q, double qp_alpha, double qp_beta);

struct ReconcileResult {
  PseudoConditionals solved;      ///< element-wise solutions, ratio exactly q_hat
  PseudoConditionals normalized;  ///< rows / columns renormalised
  double qp_alpha = 0.0;
  double qp_beta = 0.0;
  Index clamped = 0;              ///< solutions that had to be raised to eps
};

/// Projects the pseudo-conditionals onto the ratio constraint Q_hat element by
/// element, then renormalises P(G|u) over views and P(u|G) over instances.
ReconcileResult reconcile(const PseudoConditionals& pc, const Matrix& q_hat, double eps = kDefaultFloor);

/// Sum over views of P(G_s | u_i) P_s(i, j).
Matrix unified_transition(const Matrix& graph_given_instance, std::span<const Matrix> transitions);

/// P(u_i) times the unified transition, before symmetrisation.
Matrix raw_unified_affinity(const Vector& instance_marginal, const Matrix& graph_given_instance,
                            std::span<const Matrix> transitions);

/// Keeps the k largest off-diagonal entries of every row of a symmetric
/// matrix (union rule); ties go to the lower column index.
SparseMatrix sparsify_knn(const Matrix& w, Index k);

struct UnifiedGraph {
  AffinityMatrix w;        ///< symmetric, sparsified, rescaled
  Vector pi;               ///< diagonal of Pi, P(u_i)
  Matrix transition;       ///< unified row-stochastic transition
  SparseMatrix laplacian;  ///< Pi - W
  double scale = 1.0;      ///< global factor applied after sparsification
};

/// Fuses the per-view transitions into one affinity, symmetrises it, keeps a
/// k_final-NN neighbourhood and rescales it so no row sum exceeds its P(u_i).
UnifiedGraph unified_graph(const Vector& instance_marginal, const Matrix& graph_given_instance,
                           std::span<const Matrix> transitions, Index k_final);

/// Everything derived from the per-view consensus information.
struct ViewPrior {
  Matrix consistency;  ///< n x S
  PseudoConditionals pseudo;
  Matrix quotient;
  QuotientFactor factor;
  ReconcileResult reconciled;
  std::vector<Index> pruned_edges;  ///< undirected edges removed per view
};

/// Runs consensus pruning, consistency, pseudo-conditionals, rank-1
/// reconciliation for S views. `dense_graphs[s]` must be built from
/// `neighbors[s]`.
ViewPrior build_view_prior(std::span<const AffinityMatrix> dense_graphs,
                           std::span<const NeighborLists> neighbors, double tau,
                           double eps = kDefaultFloor);

}  // namespace cpcp
