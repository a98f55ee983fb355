#include "cpcp/prior.hpp"

#include "cpcp/consensus.hpp"
#include "cpcp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace cpcp {

Matrix pseudo_graph_prior(const Matrix& consistencies) {
  if (consistencies.cols() < 1) throw ValidationError("at least one view is required");
  if (!consistencies.allFinite() || (consistencies.array() < 0.0).any())
    throw ValidationError("consistencies must be finite and nonnegative");
  Matrix out = (consistencies.array() + 1.0).inverse().matrix();
  for (Index i = 0; i < out.rows(); ++i) out.row(i) /= out.row(i).sum();
  return out;
}

Matrix quotient_matrix(const PseudoConditionals& pc) {
  const Matrix& b = pc.graph_given_instance;
  const Matrix& a = pc.instance_given_graph;
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ValidationError("pseudo-conditional matrices have different shapes");
  if (!((a.array() > 0.0).all() && (b.array() > 0.0).all()))
    throw NumericalError("pseudo-conditionals must be strictly positive to form a quotient");
  Matrix q = a.cwiseQuotient(b);
  if (!q.allFinite()) throw NumericalError("quotient matrix has non-finite entries");
  return q;
}

QuotientFactor rank1_approximate(const Matrix& q) {
  if (q.rows() < 1 || q.cols() < 1) throw ValidationError("quotient matrix is empty");
  if (!q.allFinite() || !(q.array() > 0.0).all())
    throw ValidationError("quotient matrix must be finite and strictly positive");

  constexpr double kTolerance = 1e-12;
  constexpr int kMaxIterations = 10000;

  const Matrix gram = q.transpose() * q;
  Vector v = Vector::Ones(q.cols()).normalized();
  QuotientFactor out;
  for (out.iterations = 1; out.iterations <= kMaxIterations; ++out.iterations) {
    Vector next = (gram * v).normalized();
    const double step = (next - v).norm();
    v = std::move(next);
    if (step < kTolerance) break;
  }
  out.iterations = std::min(out.iterations, kMaxIterations);

  Vector u = q * v;
  out.singular_value = u.norm();
  u /= out.singular_value;
  if (v.sum() < 0.0) {
    v = -v;
    u = -u;
  }
  // Perron-Frobenius: the leading pair of a positive matrix is positive.
  if (!((u.array() > 0.0).all() && (v.array() > 0.0).all()))
    throw NumericalError("leading singular vectors of the quotient matrix have mixed signs");

  out.q_hat = out.singular_value * u * v.transpose();
  const double mass = u.sum();
  out.m = u / mass;
  out.n = out.singular_value * mass * v;
  out.instance_marginal = out.m;
  out.graph_marginal = out.n.cwiseInverse();
  out.graph_marginal /= out.graph_marginal.sum();
  return out;
}

ReconciledPair reconcile_element(double a, double b, double q, double qp_alpha, double qp_beta) {
  const double g = (qp_alpha * q * a + qp_beta * b) / (qp_alpha * q * q + qp_beta);
  return {q * g, g};
}

ReconcileResult reconcile(const PseudoConditionals& pc, const Matrix& q_hat, double eps) {
  const Matrix& a = pc.instance_given_graph;
  const Matrix& b = pc.graph_given_instance;
  if (q_hat.rows() != a.rows() || q_hat.cols() != a.cols() || b.rows() != a.rows() || b.cols() != a.cols())
    throw ValidationError("reconcile inputs have different shapes");
  if (!(q_hat.array() > 0.0).all()) throw ValidationError("rank-1 quotient must be positive");

  ReconcileResult out;
  out.qp_alpha = 1.0 / a.squaredNorm();
  out.qp_beta = 1.0 / b.squaredNorm();
  out.solved.instance_given_graph.resize(a.rows(), a.cols());
  out.solved.graph_given_instance.resize(a.rows(), a.cols());
  for (Index s = 0; s < a.cols(); ++s)
    for (Index i = 0; i < a.rows(); ++i) {
      auto [x_u, x_g] = reconcile_element(a(i, s), b(i, s), q_hat(i, s), out.qp_alpha, out.qp_beta);
      if (!(x_g > 0.0) || !(x_u > 0.0)) {
        ++out.clamped;
        x_g = std::max(x_g, eps);
        x_u = std::max(x_u, eps);
      }
      out.solved.instance_given_graph(i, s) = x_u;
      out.solved.graph_given_instance(i, s) = x_g;
    }

  out.normalized = out.solved;
  auto& g = out.normalized.graph_given_instance;
  for (Index i = 0; i < g.rows(); ++i) g.row(i) /= g.row(i).sum();
  auto& u = out.normalized.instance_given_graph;
  for (Index s = 0; s < u.cols(); ++s) u.col(s) /= u.col(s).sum();
  return out;
}

namespace {

void check_transitions(const Matrix& graph_given_instance, std::span<const Matrix> transitions) {
  const Index n = graph_given_instance.rows();
  if (static_cast<Index>(transitions.size()) != graph_given_instance.cols())
    throw ValidationError("one transition matrix per view is required");
  for (const Matrix& p : transitions)
    if (p.rows() != n || p.cols() != n) throw ValidationError("transition matrix has the wrong shape");
}

}  // namespace

Matrix unified_transition(const Matrix& graph_given_instance, std::span<const Matrix> transitions) {
  check_transitions(graph_given_instance, transitions);
  const Index n = graph_given_instance.rows();
  Matrix out = Matrix::Zero(n, n);
  for (std::size_t s = 0; s < transitions.size(); ++s)
    out.noalias() += graph_given_instance.col(static_cast<Index>(s)).asDiagonal() * transitions[s];
  return out;
}

Matrix raw_unified_affinity(const Vector& instance_marginal, const Matrix& graph_given_instance,
                            std::span<const Matrix> transitions) {
  if (instance_marginal.size() != graph_given_instance.rows())
    throw ValidationError("instance marginal has the wrong length");
  return instance_marginal.asDiagonal() * unified_transition(graph_given_instance, transitions);
}

SparseMatrix sparsify_knn(const Matrix& w, Index k) {
  const Index n = w.rows();
  if (w.cols() != n) throw ValidationError("cannot sparsify a non-square matrix");
  if (k < 1) throw ValidationError("sparsification needs k >= 1");
  k = std::min(k, n - 1);
  std::vector<Index> order;
  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 0; i < n; ++i) {
    order.clear();
    for (Index j = 0; j < n; ++j)
      if (j != i) order.push_back(j);
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Index a, Index b) {
      return w(i, a) > w(i, b) || (w(i, a) == w(i, b) && a < b);
    });
    for (Index r = 0; r < k; ++r) edges.emplace_back(std::min(i, order[r]), std::max(i, order[r]));
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  std::vector<Triplet> entries;
  for (const auto& [i, j] : edges) {
    const double value = w(i, j);
    if (value <= 0.0) continue;
    entries.emplace_back(i, j, value);
    entries.emplace_back(j, i, value);
  }
  SparseMatrix out(n, n);
  out.setFromTriplets(entries.begin(), entries.end());
  return out;
}

UnifiedGraph unified_graph(const Vector& instance_marginal, const Matrix& graph_given_instance,
                           std::span<const Matrix> transitions, Index k_final) {
  if (!(instance_marginal.array() > 0.0).all())
    throw ValidationError("instance marginal must be strictly positive");
  UnifiedGraph out;
  out.pi = instance_marginal / instance_marginal.sum();
  out.transition = unified_transition(graph_given_instance, transitions);

  Matrix raw = instance_marginal.asDiagonal() * out.transition;
  Matrix sym = 0.5 * (raw + raw.transpose());
  sym.diagonal().setZero();
  SparseMatrix sparse = sparsify_knn(sym, k_final);

  // An isolated instance gets its strongest original edge back at floor weight.
  Vector degree = Vector::Zero(sparse.rows());
  for (Index c = 0; c < sparse.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(sparse, c); it; ++it) degree(it.row()) += it.value();
  for (Index i = 0; i < degree.size(); ++i) {
    if (degree(i) > 0.0) continue;
    Index best = i == 0 ? 1 : 0;
    for (Index j = 0; j < sym.cols(); ++j)
      if (j != i && sym(i, j) > sym(i, best)) best = j;
    const double value = std::max(sym(i, best), kDefaultFloor);
    sparse.coeffRef(i, best) = value;
    sparse.coeffRef(best, i) = value;
    degree(i) += value;
    degree(best) += value;
  }

  const double worst = degree.cwiseQuotient(out.pi).maxCoeff();
  out.scale = 1.0 / worst;
  sparse *= out.scale;
  out.w = AffinityMatrix(std::move(sparse));

  SparseMatrix pi_diag(out.pi.size(), out.pi.size());
  pi_diag.reserve(Eigen::VectorXi::Constant(out.pi.size(), 1));
  for (Index i = 0; i < out.pi.size(); ++i) pi_diag.insert(i, i) = out.pi(i);
  out.laplacian = pi_diag - out.w.weights();
  out.laplacian.makeCompressed();
  return out;
}

ViewPrior build_view_prior(std::span<const AffinityMatrix> dense_graphs,
                           std::span<const NeighborLists> neighbors, double tau, double eps) {
  const std::size_t views = dense_graphs.size();
  if (views == 0) throw ValidationError("at least one view is required");
  if (neighbors.size() != views) throw ValidationError("one neighbour list set per view is required");
  const Index n = dense_graphs[0].size();

  ViewPrior out;
  out.consistency.resize(n, static_cast<Index>(views));
  out.pseudo.instance_given_graph.resize(n, static_cast<Index>(views));
  for (std::size_t s = 0; s < views; ++s) {
    const AffinityMatrix& dense = dense_graphs[s];
    if (dense.size() != n) throw ValidationError("views disagree on the number of instances");
    const AffinityMatrix pruned = prune_affinity(dense, consensus_matrix(neighbors[s]), tau);
    out.pruned_edges.push_back((dense.weights().nonZeros() - pruned.weights().nonZeros()) / 2);
    out.consistency.col(static_cast<Index>(s)) = consistency(dense, pruned, eps);
    out.pseudo.instance_given_graph.col(static_cast<Index>(s)) =
        instance_probability(floored_affinity(dense, eps));
  }
  out.pseudo.graph_given_instance = pseudo_graph_prior(out.consistency);
  out.quotient = quotient_matrix(out.pseudo);
  out.factor = rank1_approximate(out.quotient);
  out.reconciled = reconcile(out.pseudo, out.factor.q_hat, eps);
  return out;
}

}  // namespace cpcp
