#pragma once

#include <Eigen/Dense>
#include <gmpxx.h>

#include <cstddef>
#include <vector>

namespace cantorlap {

using IntMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

/// Dense row-major matrix of exact rationals. Only used for the small N x N
/// computations (ranks, kernels, Perron vectors of integer matrices).
using RationalMatrix = std::vector<std::vector<mpq_class>>;
using RationalVector = std::vector<mpq_class>;

RationalMatrix to_rational(const IntMatrix& a);
RationalMatrix transpose(const RationalMatrix& a);
RationalMatrix multiply(const RationalMatrix& a, const RationalMatrix& b);
RationalMatrix power(const RationalMatrix& a, int exponent);

std::size_t rank(RationalMatrix a);

/// Basis of {x : a x = 0}, one vector per free column of the reduced row
/// echelon form.
std::vector<RationalVector> kernel(RationalMatrix a);

/// Eigenpair for the Perron root of a non-negative irreducible matrix.
struct PerronPair {
    double value = 0.0;
    Eigen::VectorXd right;  // m * right = value * right, entries > 0
    Eigen::VectorXd left;   // left^T * m = value * left^T, entries > 0
};

/// Throws ConvergenceFailure if either residual stays above
/// `tolerance * value`.
PerronPair perron_pair(const Eigen::MatrixXd& m, double tolerance = 1e-12);

}  // namespace cantorlap
