#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace cpcp {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Additive floor applied before taking ratios or logarithms of affinities.
inline constexpr double kDefaultFloor = 1e-8;

}  // namespace cpcp
