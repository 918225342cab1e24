#include "cantorlap/cohomology.hpp"

#include "cantorlap/error.hpp"

#include <algorithm>
#include <cmath>

namespace cantorlap {

namespace {

// Deterministic sign: first entry of non-negligible size is positive.
void normalize_sign(Eigen::Ref<Eigen::VectorXd> v) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (std::abs(v[i]) > 1e-9) {
            if (v[i] < 0) v = -v;
            return;
        }
}

// Orthonormal basis of the kernel of m, given its expected dimension.
Eigen::MatrixXd numeric_kernel(const Eigen::MatrixXd& m, int dim) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
    Eigen::MatrixXd out = svd.matrixV().rightCols(dim);
    for (int j = 0; j < dim; ++j) normalize_sign(out.col(j));
    return out;
}

}  // namespace

EventualRange eventual_range(const IntMatrix& a) {
    const int n = static_cast<int>(a.rows());
    EventualRange out;
    out.dimension = eventual_rank(a);
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd at = a.cast<double>().transpose();
    for (int i = 0; i < n; ++i) {
        p = at * p;
        p /= p.cwiseAbs().maxCoeff();  // keep entries O(1)
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(p, Eigen::ComputeFullU);
    out.basis = svd.matrixU().leftCols(out.dimension);
    for (int j = 0; j < out.dimension; ++j) normalize_sign(out.basis.col(j));
    return out;
}

TraceFunctional::TraceFunctional(const Diagram& d, Eigen::VectorXd b0)
    : at_(d.matrix().cast<double>().transpose()), b0_(std::move(b0)) {
    if (b0_.size() != d.vertex_count()) throw Error(ErrorCode::kInvalidArgument, "b0 has the wrong size");
    q_ = eventual_range(d.matrix()).basis;
    const Eigen::VectorXd off = b0_ - q_ * (q_.transpose() * b0_);
    if (off.norm() > 1e-10 * std::max(1.0, b0_.norm()))
        throw Error(ErrorCode::kInvalidArgument, "b0 is not in the eventual range of A^T");
    restricted_.compute(q_.transpose() * at_ * q_);
}

Eigen::VectorXd TraceFunctional::level_vector(int k) const {
    if (k < 0) throw Error(ErrorCode::kInvalidArgument, "negative level");
    Eigen::VectorXd c = q_.transpose() * b0_;
    for (int i = 0; i < k; ++i) c = restricted_.solve(c);
    return q_ * c;
}

double TraceFunctional::recursion_residual(int k_max) const {
    double worst = 0.0;
    Eigen::VectorXd c = q_.transpose() * b0_;
    Eigen::VectorXd prev = q_ * c;
    for (int k = 1; k <= k_max; ++k) {
        c = restricted_.solve(c);
        const Eigen::VectorXd cur = q_ * c;
        worst = std::max(worst, (at_ * cur - prev).norm() / std::max(prev.norm(), 1e-300));
        prev = cur;
    }
    return worst;
}

double distribution_apply(const TraceFunctional& tau, const PathTree& tree, const LCFunction& f) {
    if (f.level > tree.depth() || f.values.size() != tree.size(f.level))
        throw Error(ErrorCode::kInvalidArgument, "function does not match the path tree");
    const Eigen::VectorXd b = tau.level_vector(f.level);
    double total = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) total += f.values[i] * b[tree.range(f.level, i)];
    return total;
}

CohomologySpace::CohomologySpace(const Diagram& d) {
    const EventualRange range = eventual_range(d.matrix());
    for (int j = 0; j < range.dimension; ++j) traces_.emplace_back(d, range.basis.col(j));

    const auto level1 = enumerate_paths(d, 1);
    for (int j = 0; j < range.dimension; ++j) {
        LCFunction f{1, std::vector<double>(level1.size())};
        for (std::size_t e = 0; e < level1.size(); ++e) f.values[e] = range.basis(level1[e].source, j);
        dual_.push_back(std::move(f));
    }

    // Generalized eigenspaces of A^T for the nonzero eigenvalues.
    const Eigen::MatrixXd at = d.matrix().cast<double>().transpose();
    const auto n = at.rows();
    std::vector<std::complex<double>> eig(d.perron().all_eigenvalues.begin(),
                                          d.perron().all_eigenvalues.begin() + range.dimension);
    const double tol = 1e-6 * d.lambda();
    std::vector<bool> used(eig.size(), false);
    for (std::size_t i = 0; i < eig.size(); ++i) {
        if (used[i] || eig[i].imag() < -tol) continue;
        std::vector<std::size_t> cluster;
        for (std::size_t j = i; j < eig.size(); ++j)
            if (!used[j] && std::abs(eig[j] - eig[i]) < tol) cluster.push_back(j);
        std::complex<double> mean = 0.0;
        for (auto j : cluster) {
            used[j] = true;
            mean += eig[j];
        }
        mean /= static_cast<double>(cluster.size());
        GeneralizedEigenspace space;
        space.multiplicity = static_cast<int>(cluster.size());
        const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
        Eigen::MatrixXd factor;
        if (std::abs(mean.imag()) <= tol) {
            space.eigenvalue = mean.real();
            factor = at - mean.real() * id;
        } else {
            space.eigenvalue = mean;
            space.conjugate_pair = true;
            factor = at * at - 2.0 * mean.real() * at + std::norm(mean) * id;
            for (std::size_t j = 0; j < eig.size(); ++j)
                if (!used[j] && std::abs(eig[j] - std::conj(mean)) < tol) used[j] = true;
        }
        Eigen::MatrixXd p = id;
        for (int m = 0; m < space.multiplicity; ++m) p = factor * p;
        space.basis = numeric_kernel(p, space.conjugate_pair ? 2 * space.multiplicity : space.multiplicity);
        eigen_.push_back(std::move(space));
    }
}

Eigen::MatrixXd CohomologySpace::trace_matrix() const {
    if (traces_.empty()) return {};
    Eigen::MatrixXd m(traces_.size(), traces_.front().b0().size());
    for (std::size_t i = 0; i < traces_.size(); ++i) m.row(i) = traces_[i].b0().transpose();
    return m;
}

Eigen::VectorXd CohomologySpace::class_vector(const PathTree& tree, const LCFunction& f) const {
    Eigen::VectorXd q(dimension());
    for (int i = 0; i < dimension(); ++i) q[i] = distribution_apply(traces_[i], tree, f);
    return q;
}

LCFunction CohomologySpace::canonical_representative(const PathTree& tree, const LCFunction& f) const {
    const Eigen::VectorXd q = class_vector(tree, f);
    LCFunction h{1, std::vector<double>(dual_.front().values.size(), 0.0)};
    for (int j = 0; j < dimension(); ++j)
        for (std::size_t e = 0; e < h.values.size(); ++e) h.values[e] += q[j] * dual_[j].values[e];
    return h;
}

double CohomologySpace::duality_residual(const PathTree& tree) const {
    double worst = 0.0;
    for (int j = 0; j < dimension(); ++j) {
        const Eigen::VectorXd q = class_vector(tree, dual_[j]);
        for (int i = 0; i < dimension(); ++i) worst = std::max(worst, std::abs(q[i] - (i == j ? 1.0 : 0.0)));
    }
    return worst;
}

ExtensionCheck trace_extension_check(const CohomologySpace& c, std::size_t trace, const CellSpace& space,
                                     const LCFunction& f, double r) {
    if (c.dimension() <= 1) throw Error(ErrorCode::kNotApplicable, "extension check needs d(A) > 1");
    const PerronData& p = space.diagram().perron();
    const double critical = 1.0 - std::log(p.lambda_minus) / std::log(p.lambda);
    if (r < critical - 1e-12)
        throw Error(ErrorCode::kInvalidArgument, "r is below the critical exponent " + std::to_string(critical));
    ExtensionCheck out;
    out.value = std::abs(distribution_apply(c.traces().at(trace), space.tree(), f));
    out.norm = sr_norm(space, f, r);
    const auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
    if (!(out.norm > 0) || *hi - *lo <= 1e-14 * sup_norm(f))
        throw Error(ErrorCode::kDivisionByZero, "constants have zero S_r norm and are excluded");
    out.ratio = out.value / out.norm;
    return out;
}

}  // namespace cantorlap
