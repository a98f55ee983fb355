#include "cpcp/propagation.hpp"

#include "cpcp/errors.hpp"
#include "cpcp/graph.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>

namespace cpcp {

void ConstraintSet::validate(Index n) const {
  std::set<IndexPair> must;
  auto check = [n](const IndexPair& p, const char* kind) {
    if (p.first < 0 || p.first >= n || p.second < 0 || p.second >= n)
      throw ValidationError(std::string(kind) + " (" + std::to_string(p.first) + ", " +
                            std::to_string(p.second) + ") is out of range for n = " + std::to_string(n));
    if (p.first == p.second)
      throw ValidationError(std::string(kind) + " pairs an instance with itself: " + std::to_string(p.first));
    return IndexPair{std::min(p.first, p.second), std::max(p.first, p.second)};
  };
  for (const auto& p : must_links) must.insert(check(p, "must-link"));
  for (const auto& p : cannot_links)
    if (must.count(check(p, "cannot-link")))
      throw ValidationError("pair (" + std::to_string(p.first) + ", " + std::to_string(p.second) +
                            ") is both must-link and cannot-link");
}

SideInformation side_information(const ConstraintSet& constraints, Index n) {
  constraints.validate(n);
  std::vector<Triplet> plus, minus;
  for (const auto& [i, j] : constraints.must_links) {
    plus.emplace_back(i, j, 1.0);
    plus.emplace_back(j, i, 1.0);
  }
  for (const auto& [i, j] : constraints.cannot_links) {
    minus.emplace_back(i, j, -1.0);
    minus.emplace_back(j, i, -1.0);
  }
  // Repeated pairs collapse to a single entry.
  auto dup = [](double a, double) { return a; };
  SideInformation si;
  si.y_plus.resize(n, n);
  si.y_plus.setFromTriplets(plus.begin(), plus.end(), dup);
  si.y_minus.resize(n, n);
  si.y_minus.setFromTriplets(minus.begin(), minus.end(), dup);
  si.y = si.y_plus + si.y_minus;
  return si;
}

double balance_weight(const ConstraintSet& constraints) {
  if (constraints.must_links.empty() || constraints.cannot_links.empty()) return 1.0;
  return std::sqrt(static_cast<double>(constraints.cannot_links.size()) /
                   static_cast<double>(constraints.must_links.size()));
}

namespace {

// Factorises a sparse symmetric system, preferring LDL^T when it is positive
// definite and falling back to LU otherwise.
class SymmetricSolver {
 public:
  explicit SymmetricSolver(const SparseMatrix& a) {
    ldlt_.compute(a);
    if (ldlt_.info() == Eigen::Success) {
      const Vector pivots = ldlt_.vectorD();
      smallest_pivot_ = pivots.cwiseAbs().minCoeff();
      if ((pivots.array() > 0.0).all()) return;
    }
    lu_.emplace();
    lu_->compute(a);
    if (lu_->info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "propagation system is singular (smallest LDL^T pivot " << smallest_pivot_
          << "); increase eta";
      throw NumericalError(msg.str());
    }
  }

  Matrix solve(const Matrix& rhs) const {
    Matrix x = lu_ ? Matrix(lu_->solve(rhs)) : Matrix(ldlt_.solve(rhs));
    if (!x.allFinite()) throw NumericalError("propagation solve produced non-finite values");
    return x;
  }

 private:
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
  std::optional<Eigen::SparseLU<SparseMatrix>> lu_;
  double smallest_pivot_ = 0.0;
};

struct Restricted {
  std::vector<Index> touched;  // instances that appear in a constraint
  Matrix inverse_columns;      // (L + a eta Pi)^-1 restricted to `touched` columns
  SparseMatrix weighted;       // a Y+ + Y-
};

Restricted restricted_solve(const UnifiedGraph& graph, const SideInformation& si, double eta,
                            double balance_alpha) {
  const Index n = graph.pi.size();
  if (!(eta > 0.0)) throw ValidationError("eta must be positive");
  if (!(balance_alpha > 0.0)) throw ValidationError("balance weight must be positive");
  if (si.y.rows() != n) throw ValidationError("side information does not match the graph size");

  Restricted out;
  out.weighted = balance_alpha * si.y_plus + si.y_minus;
  std::vector<char> mark(static_cast<std::size_t>(n), 0);
  for (Index c = 0; c < out.weighted.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(out.weighted, c); it; ++it) mark[static_cast<std::size_t>(it.row())] = 1;
  for (Index i = 0; i < n; ++i)
    if (mark[static_cast<std::size_t>(i)]) out.touched.push_back(i);
  if (out.touched.empty()) return out;

  SparseMatrix system = graph.laplacian;
  for (Index i = 0; i < n; ++i) system.coeffRef(i, i) += balance_alpha * eta * graph.pi(i);
  const SymmetricSolver solver(system);

  Matrix selector = Matrix::Zero(n, static_cast<Index>(out.touched.size()));
  for (std::size_t c = 0; c < out.touched.size(); ++c) selector(out.touched[c], static_cast<Index>(c)) = 1.0;
  out.inverse_columns = solver.solve(selector);
  return out;
}

}  // namespace

Matrix vertical_balanced(const UnifiedGraph& graph, const SideInformation& si, double eta,
                         double balance_alpha) {
  const Index n = graph.pi.size();
  const Restricted r = restricted_solve(graph, si, eta, balance_alpha);
  if (r.touched.empty()) return Matrix::Zero(n, n);
  const Matrix rhs = graph.pi.asDiagonal() * Matrix(r.weighted);
  Matrix rows(static_cast<Index>(r.touched.size()), n);
  for (std::size_t c = 0; c < r.touched.size(); ++c) rows.row(static_cast<Index>(c)) = rhs.row(r.touched[c]);
  return eta * r.inverse_columns * rows;
}

PropagationResult propagate_balanced(const UnifiedGraph& graph, const SideInformation& si, double eta,
                                     double balance_alpha) {
  const Index n = graph.pi.size();
  const Restricted r = restricted_solve(graph, si, eta, balance_alpha);
  PropagationResult out{Matrix::Zero(n, n), eta, balance_alpha};
  if (r.touched.empty()) return out;

  const Index m = static_cast<Index>(r.touched.size());
  Matrix core(m, m);
  for (Index a = 0; a < m; ++a)
    for (Index b = 0; b < m; ++b) {
      const Index i = r.touched[static_cast<std::size_t>(a)];
      const Index j = r.touched[static_cast<std::size_t>(b)];
      core(a, b) = graph.pi(i) * r.weighted.coeff(i, j) * graph.pi(j);
    }
  out.f.noalias() = (eta * eta) * r.inverse_columns * (core * r.inverse_columns.transpose());
  return out;
}

namespace {

class DenseSymmetricSolver {
 public:
  explicit DenseSymmetricSolver(const Matrix& a) : ldlt_(a) {
    if (ldlt_.info() == Eigen::Success && ldlt_.isPositive() && (ldlt_.vectorD().array() > 0.0).all()) return;
    lu_.emplace(a);
    if (!(std::abs(lu_->determinant()) > 0.0) || lu_->rcond() < 1e-15) {
      std::ostringstream msg;
      msg << "propagation system is singular (smallest LDL^T pivot "
          << ldlt_.vectorD().cwiseAbs().minCoeff() << "); increase eta";
      throw NumericalError(msg.str());
    }
  }

  Matrix solve(const Matrix& rhs) const {
    Matrix x = lu_ ? Matrix(lu_->solve(rhs)) : Matrix(ldlt_.solve(rhs));
    if (!x.allFinite()) throw NumericalError("propagation solve produced non-finite values");
    return x;
  }

 private:
  Eigen::LDLT<Matrix> ldlt_;
  std::optional<Eigen::PartialPivLU<Matrix>> lu_;
};

Matrix system_matrix(const Vector& pi, const Matrix& laplacian, double eta) {
  const Index n = pi.size();
  if (!(eta > 0.0)) throw ValidationError("eta must be positive");
  if (laplacian.rows() != n || laplacian.cols() != n) throw ValidationError("laplacian has the wrong shape");
  Matrix a = laplacian;
  a.diagonal() += eta * pi;
  return a;
}

}  // namespace

PropagationResult propagate_closed_form(const Vector& pi, const Matrix& laplacian, const Matrix& y,
                                        double eta) {
  const Index n = pi.size();
  if (y.rows() != n || y.cols() != n) throw ValidationError("side information has the wrong shape");
  PropagationResult out{Matrix::Zero(n, n), eta, 1.0};
  if (y.isZero(0.0)) return out;
  const DenseSymmetricSolver solver(system_matrix(pi, laplacian, eta));
  const Matrix left = solver.solve(pi.asDiagonal() * y * pi.asDiagonal());
  out.f = (eta * eta) * solver.solve(left.transpose()).transpose();
  return out;
}

Matrix vertical_closed_form(const Vector& pi, const Matrix& laplacian, const Matrix& y, double eta) {
  const DenseSymmetricSolver solver(system_matrix(pi, laplacian, eta));
  return eta * solver.solve(pi.asDiagonal() * y);
}

Matrix mmcp_laplacian(const Vector& pi, const Matrix& transition) {
  Matrix weighted = pi.asDiagonal() * transition;
  Matrix out = -0.5 * (weighted + weighted.transpose());
  out.diagonal() += pi;
  return out;
}

PropagationResult propagate_mmcp(const Vector& pi, const Matrix& transition, const Matrix& y, double eta) {
  return propagate_closed_form(pi, mmcp_laplacian(pi, transition), y, eta);
}

MmcpGraph mmcp_unified(const Matrix& instance_given_graph, std::span<const Matrix> transitions,
                       const Vector& prior) {
  if (prior.size() != instance_given_graph.cols())
    throw ValidationError("manual prior needs one entry per view");
  if (!(prior.array() > 0.0).all()) throw ValidationError("manual prior entries must be positive");
  if (std::abs(prior.sum() - 1.0) > 1e-6) throw ValidationError("manual prior must sum to 1");
  const Vector p_g = prior / prior.sum();

  MmcpGraph out;
  out.pi = instance_given_graph * p_g;
  if (!(out.pi.array() > 0.0).all()) throw NumericalError("an instance has zero probability under every view");
  out.graph_given_instance = out.pi.cwiseInverse().asDiagonal() * instance_given_graph * p_g.asDiagonal();
  out.transition = unified_transition(out.graph_given_instance, transitions);
  return out;
}

PropagationResult propagate_e2cp(const Matrix& affinity, const Matrix& y, double eta) {
  return propagate_mmcp(instance_probability(affinity), transition_matrix(affinity), y, eta);
}

ConstraintSet sample_constraints(std::span<const int> labels, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ValidationError("constraint budget must lie in (0, 1)");
  const auto n = static_cast<std::int64_t>(labels.size());
  const std::int64_t total = n * (n - 1) / 2;
  const auto count = static_cast<std::int64_t>(std::llround(fraction * static_cast<double>(total)));
  if (count > total || total == 0)
    throw ValidationError("constraint budget exceeds the " + std::to_string(total) + " available pairs");

  std::mt19937_64 rng(seed);
  std::vector<IndexPair> pairs;
  if (count * 4 <= total) {
    std::uniform_int_distribution<std::int64_t> pick(0, n - 1);
    std::set<IndexPair> chosen;
    while (static_cast<std::int64_t>(pairs.size()) < count) {
      const Index a = pick(rng), b = pick(rng);
      if (a == b) continue;
      const IndexPair p{std::min(a, b), std::max(a, b)};
      if (chosen.insert(p).second) pairs.push_back(p);
    }
  } else {
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    pairs.resize(static_cast<std::size_t>(count));
  }

  ConstraintSet out;
  for (const auto& p : pairs) {
    if (labels[static_cast<std::size_t>(p.first)] == labels[static_cast<std::size_t>(p.second)])
      out.must_links.push_back(p);
    else
      out.cannot_links.push_back(p);
  }
  return out;
}

}  // namespace cpcp
