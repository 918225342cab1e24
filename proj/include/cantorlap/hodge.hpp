#pragma once

#include "cantorlap/cohomology.hpp"
#include "cantorlap/functions.hpp"
#include "cantorlap/spectral.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace cantorlap {

/// 2 (1 + d_psi - log lambda_- / log lambda).
double hodge_threshold(const GibbsData& g);

/// Energy minimization over zero-mean level-K functions of a fixed class, in
/// eigen-coordinates (one coordinate per non-constant basis function).
class HodgeProblem {
public:
    HodgeProblem(const EigenBasis& basis, const SpectrumTable& table, const CohomologySpace& cohomology);

    const EigenBasis& basis() const { return *basis_; }
    const CohomologySpace& cohomology() const { return *cohomology_; }
    double gamma() const { return gamma_; }
    int level() const { return basis_->level(); }

    /// C(i, j) = D_{tau_i}(psi_j).
    const Eigen::MatrixXd& constraints() const { return c_; }
    const Eigen::VectorXd& eigenvalues() const { return lambda_; }
    int constraint_rank() const { return rank_; }
    /// Orthonormal coordinates of the coboundaries, one per column.
    const Eigen::MatrixXd& coboundary_coordinates() const { return null_; }

    /// D_{tau_i}(f) for every trace.
    Eigen::VectorXd class_target(const LCFunction& f) const;
    double energy(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

private:
    const EigenBasis* basis_;
    const CohomologySpace* cohomology_;
    double gamma_;
    Eigen::MatrixXd c_;
    Eigen::VectorXd lambda_;
    int rank_ = 0;
    Eigen::MatrixXd row_basis_;  // U_r^T, maps targets to the reduced system
    Eigen::MatrixXd reduced_;    // r x n
    Eigen::MatrixXd null_;
};

/// Coboundaries as functions at level K.
std::vector<LCFunction> coboundary_basis(const HodgeProblem& p);

struct HarmonicResult {
    LCFunction h;
    Eigen::VectorXd coordinates;
    double energy = 0.0;
    double residual = 0.0;
    double condition_number = 1.0;
};

/// h = mean(f) + the energy minimizer among zero-mean functions in the class of f - mean(f).
HarmonicResult harmonic_representative(const HodgeProblem& p, const LCFunction& f);
double harmonicity_residual(const HodgeProblem& p, const LCFunction& h);

struct RefinementStep {
    int level = 0;
    HarmonicResult result;
    double l2_distance_to_previous = 0.0;  // 0 for the first level
};

std::vector<RefinementStep> refine_and_compare(const GibbsData& g, const CohomologySpace& cohomology, double gamma,
                                               const LCFunction& f, std::span<const int> levels,
                                               std::size_t cap = kDefaultPathCap);

}  // namespace cantorlap
