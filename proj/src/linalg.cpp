#include "cantorlap/linalg.hpp"

#include "cantorlap/error.hpp"

#include <algorithm>
#include <cmath>

namespace cantorlap {

RationalMatrix to_rational(const IntMatrix& a) {
    RationalMatrix out(a.rows(), RationalVector(a.cols()));
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out[i][j] = mpq_class(static_cast<long>(a(i, j)));
    return out;
}

RationalMatrix transpose(const RationalMatrix& a) {
    if (a.empty()) return {};
    RationalMatrix out(a[0].size(), RationalVector(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) out[j][i] = a[i][j];
    return out;
}

RationalMatrix multiply(const RationalMatrix& a, const RationalMatrix& b) {
    const std::size_t n = a.size();
    const std::size_t inner = b.size();
    const std::size_t m = inner == 0 ? 0 : b[0].size();
    RationalMatrix out(n, RationalVector(m, mpq_class(0)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < inner; ++k) {
            if (a[i][k] == 0) continue;
            for (std::size_t j = 0; j < m; ++j) out[i][j] += a[i][k] * b[k][j];
        }
    return out;
}

RationalMatrix power(const RationalMatrix& a, int exponent) {
    const std::size_t n = a.size();
    RationalMatrix result(n, RationalVector(n, mpq_class(0)));
    for (std::size_t i = 0; i < n; ++i) result[i][i] = 1;
    RationalMatrix base = a;
    while (exponent > 0) {
        if (exponent & 1) result = multiply(result, base);
        exponent >>= 1;
        if (exponent > 0) base = multiply(base, base);
    }
    return result;
}

namespace {

// Reduced row echelon form in place; returns pivot columns.
std::vector<std::size_t> rref(RationalMatrix& a) {
    std::vector<std::size_t> pivots;
    if (a.empty()) return pivots;
    const std::size_t rows = a.size();
    const std::size_t cols = a[0].size();
    std::size_t row = 0;
    for (std::size_t col = 0; col < cols && row < rows; ++col) {
        std::size_t pivot = row;
        while (pivot < rows && a[pivot][col] == 0) ++pivot;
        if (pivot == rows) continue;
        std::swap(a[row], a[pivot]);
        const mpq_class inv = 1 / a[row][col];
        for (auto& x : a[row]) x *= inv;
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == row || a[r][col] == 0) continue;
            const mpq_class factor = a[r][col];
            for (std::size_t c = col; c < cols; ++c) a[r][c] -= factor * a[row][c];
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

}  // namespace

std::size_t rank(RationalMatrix a) { return rref(a).size(); }

std::vector<RationalVector> kernel(RationalMatrix a) {
    if (a.empty()) return {};
    const std::size_t cols = a[0].size();
    const auto pivots = rref(a);
    std::vector<bool> is_pivot(cols, false);
    for (auto p : pivots) is_pivot[p] = true;
    std::vector<RationalVector> basis;
    for (std::size_t free = 0; free < cols; ++free) {
        if (is_pivot[free]) continue;
        RationalVector v(cols, mpq_class(0));
        v[free] = 1;
        for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -a[r][free];
        basis.push_back(std::move(v));
    }
    return basis;
}

namespace {

// Inverse iteration close to the Perron root; the shift keeps the solve
// well-posed while the contraction factor stays tiny.
Eigen::VectorXd perron_vector(const Eigen::MatrixXd& m, double value) {
    const Eigen::Index n = m.rows();
    const double shift = value * (1.0 + 1e-9);
    Eigen::MatrixXd shifted = m - shift * Eigen::MatrixXd::Identity(n, n);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(shifted);
    Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
    for (int it = 0; it < 8; ++it) {
        x = lu.solve(x);
        x /= x.cwiseAbs().maxCoeff();
    }
    if (x.sum() < 0) x = -x;
    // A few power steps smooth out the last digits.
    for (int it = 0; it < 4; ++it) {
        x = m * x;
        x /= x.cwiseAbs().maxCoeff();
    }
    return x;
}

}  // namespace

PerronPair perron_pair(const Eigen::MatrixXd& m, double tolerance) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw Error(ErrorCode::kInvalidArgument, "perron_pair needs a non-empty square matrix");
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorCode::kConvergenceFailure, "eigenvalue solver failed");
    double value = 0.0;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
        value = std::max(value, solver.eigenvalues()[i].real());
    if (!(value > 0.0)) throw Error(ErrorCode::kConvergenceFailure, "no positive Perron root");

    PerronPair out;
    out.right = perron_vector(m, value);
    out.left = perron_vector(m.transpose(), value);
    // Rayleigh-type refinement of the root from the right vector.
    out.value = (m * out.right).sum() / out.right.sum();

    auto residual = [&](const Eigen::MatrixXd& mat, const Eigen::VectorXd& v) {
        return (mat * v - out.value * v).cwiseAbs().maxCoeff() / v.cwiseAbs().maxCoeff();
    };
    const double limit = tolerance * out.value;
    if (residual(m, out.right) > limit || residual(m.transpose(), out.left) > limit)
        throw Error(ErrorCode::kConvergenceFailure, "Perron residual above tolerance");
    if (out.right.minCoeff() <= 0.0 || out.left.minCoeff() <= 0.0)
        throw Error(ErrorCode::kConvergenceFailure, "Perron vector is not strictly positive");
    return out;
}

}  // namespace cantorlap
