#pragma once

#include "cantorlap/bratteli.hpp"
#include "cantorlap/functions.hpp"
#include "cantorlap/lc_function.hpp"

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace cantorlap {

/// Orthonormal basis (columns) of the column space of (A^T)^N.
struct EventualRange {
    Eigen::MatrixXd basis;
    int dimension = 0;
};
EventualRange eventual_range(const IntMatrix& a);

/// A trace, stored through b_0; b_k solves A^T b_k = b_{k-1} inside the
/// eventual range.
class TraceFunctional {
public:
    TraceFunctional(const Diagram& d, Eigen::VectorXd b0);

    const Eigen::VectorXd& b0() const { return b0_; }
    double norm() const { return b0_.norm(); }
    Eigen::VectorXd level_vector(int k) const;
    /// max over 1 <= k <= k_max of |A^T b_k - b_{k-1}| / |b_{k-1}|.
    double recursion_residual(int k_max) const;

private:
    Eigen::MatrixXd at_;  // A^T
    Eigen::MatrixXd q_;
    Eigen::PartialPivLU<Eigen::MatrixXd> restricted_;  // Q^T A^T Q
    Eigen::VectorXd b0_;
};

/// D_tau(f) = sum over cells e of f_e b_{K, r(e)}.
double distribution_apply(const TraceFunctional& tau, const PathTree& tree, const LCFunction& f);

/// Generalized eigenspace of A^T for one nonzero eigenvalue; complex
/// conjugate pairs share one real subspace of twice the multiplicity.
struct GeneralizedEigenspace {
    std::complex<double> eigenvalue;
    int multiplicity = 0;
    bool conjugate_pair = false;
    Eigen::MatrixXd basis;
};

class CohomologySpace {
public:
    explicit CohomologySpace(const Diagram& d);

    int dimension() const { return static_cast<int>(traces_.size()); }
    const std::vector<TraceFunctional>& traces() const { return traces_; }
    /// Rows are the b_0 vectors.
    Eigen::MatrixXd trace_matrix() const;
    /// Level-1 functions with D_{tau_i}(f_j) = delta_ij.
    const std::vector<LCFunction>& dual_basis() const { return dual_; }
    const std::vector<GeneralizedEigenspace>& eigen_structure() const { return eigen_; }

    Eigen::VectorXd class_vector(const PathTree& tree, const LCFunction& f) const;
    LCFunction canonical_representative(const PathTree& tree, const LCFunction& f) const;
    /// max |D_{tau_i}(f_j) - delta_ij|.
    double duality_residual(const PathTree& tree) const;

private:
    std::vector<TraceFunctional> traces_;
    std::vector<LCFunction> dual_;
    std::vector<GeneralizedEigenspace> eigen_;
};

struct ExtensionCheck {
    double value = 0.0;  // |D_tau(f)|
    double norm = 0.0;   // ||f||_r
    double ratio = 0.0;
};
ExtensionCheck trace_extension_check(const CohomologySpace& c, std::size_t trace, const CellSpace& space,
                                     const LCFunction& f, double r);

}  // namespace cantorlap
