#pragma once

#include "cpcp/prior.hpp"
#include "cpcp/types.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace cpcp {

using IndexPair = std::pair<Index, Index>;

/// Must-link and cannot-link pairs over instances [0, n).
struct ConstraintSet {
  std::vector<IndexPair> must_links;
  std::vector<IndexPair> cannot_links;

  std::size_t size() const { return must_links.size() + cannot_links.size(); }

  /// Throws ValidationError on out-of-range or self pairs and on a pair that
  /// is both must-link and cannot-link.
  void validate(Index n) const;
};

/// Y and its split Y = Y_plus + Y_minus.
struct SideInformation {
  SparseMatrix y;
  SparseMatrix y_plus;
  SparseMatrix y_minus;
};

SideInformation side_information(const ConstraintSet& constraints, Index n);

/// sqrt(#cannot-link / #must-link); 1 when either set is empty.
double balance_weight(const ConstraintSet& constraints);

struct PropagationResult {
  Matrix f;
  double eta = 0.25;
  double balance_alpha = 1.0;
};

inline constexpr double kDefaultEta = 0.25;

/// Vertical result eta (L + a eta Pi)^-1 Pi (a Y+ + Y-) for L = Pi - W.
Matrix vertical_balanced(const UnifiedGraph& graph, const SideInformation& si, double eta,
                         double balance_alpha);

/// Balanced two-sided propagation
/// F = eta^2 (L + a eta Pi)^-1 Pi (a Y+ + Y-) Pi (L + a eta Pi)^-1.
/// Only the columns of the inverse touched by constraints are solved for.
PropagationResult propagate_balanced(const UnifiedGraph& graph, const SideInformation& si, double eta,
                                     double balance_alpha);

/// Unweighted form eta^2 (L + eta Pi)^-1 Pi Y Pi (L + eta Pi)^-1 for an
/// arbitrary symmetric L, computed with dense solves.
PropagationResult propagate_closed_form(const Vector& pi, const Matrix& laplacian, const Matrix& y,
                                        double eta);

/// One-sided form eta (L + eta Pi)^-1 Pi Y, dense.
Matrix vertical_closed_form(const Vector& pi, const Matrix& laplacian, const Matrix& y, double eta);

/// L_hat = Pi - (Pi P + P^T Pi) / 2.
Matrix mmcp_laplacian(const Vector& pi, const Matrix& transition);

PropagationResult propagate_mmcp(const Vector& pi, const Matrix& transition, const Matrix& y, double eta);

/// Unified graph of multi-modal propagation under a manual view prior.
struct MmcpGraph {
  Vector pi;                    ///< P(u_i)
  Matrix graph_given_instance;  ///< P(G_s | u_i) by Bayes
  Matrix transition;            ///< unified transition
};

/// `instance_given_graph` is n x S with P(u_i | G_s); `prior` holds P(G_s)
/// and must be positive and sum to 1.
MmcpGraph mmcp_unified(const Matrix& instance_given_graph, std::span<const Matrix> transitions,
                       const Vector& prior);

/// Single-view propagation on one affinity (multi-modal form with S = 1).
PropagationResult propagate_e2cp(const Matrix& affinity, const Matrix& y, double eta);

/// Uniformly samples round(fraction * n(n-1)/2) distinct unordered pairs and
/// labels each by ground-truth equality. Deterministic for a given seed.
ConstraintSet sample_constraints(std::span<const int> labels, double fraction, std::uint64_t seed);

}  // namespace cpcp
