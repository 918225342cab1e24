#include "cantorlap/hodge.hpp"

#include "cantorlap/error.hpp"

#include <algorithm>
#include <cmath>

namespace cantorlap {

double hodge_threshold(const GibbsData& g) {
    const PerronData& p = g.diagram().perron();
    return 2.0 * (1.0 + g.relative_dimension() - std::log(p.lambda_minus) / std::log(p.lambda));
}

HodgeProblem::HodgeProblem(const EigenBasis& basis, const SpectrumTable& table, const CohomologySpace& cohomology)
    : basis_(&basis), cohomology_(&cohomology), gamma_(table.gamma) {
    const GibbsData& g = basis.space().gibbs();
    const double threshold = hodge_threshold(g);
    if (!(gamma_ > threshold))
        throw Error(ErrorCode::kThresholdViolation, "gamma = " + std::to_string(gamma_) +
                                                        " must exceed the Hodge threshold " + std::to_string(threshold));
    if (table.level != basis.level() || table.block_values.size() != basis.blocks().size())
        throw Error(ErrorCode::kLevelExceedsTable, "spectrum table and eigenbasis are built at different levels");

    const std::size_t n = basis.size() - 1;
    const int d = cohomology.dimension();
    const PathTree& tree = basis.space().tree();
    lambda_.resize(n);
    c_ = Eigen::MatrixXd::Zero(d, n);
    std::vector<Eigen::VectorXd> b(basis.level() + 1);
    for (int i = 0; i < d; ++i) {
        for (int k = 0; k <= basis.level(); ++k) b[k] = cohomology.traces()[i].level_vector(k);
        for (std::size_t blk = 0; blk < basis.blocks().size(); ++blk) {
            const auto& block = basis.blocks()[blk];
            const std::size_t o = basis.block_offset(blk);
            for (int l = 0; l < block.dimension(); ++l) {
                double s = 0.0;
                for (int c = 0; c < block.child_count; ++c)
                    s += block.vectors(c, l) * b[block.level + 1][tree.range(block.level + 1, block.child_begin + c)];
                c_(i, o + l) = s;
            }
        }
    }
    for (std::size_t blk = 0; blk < basis.blocks().size(); ++blk)
        for (int l = 0; l < basis.blocks()[blk].dimension(); ++l)
            lambda_[basis.block_offset(blk) + l] = table.block_values[blk];

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(c_, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double scale = sv.size() ? std::max(1.0, sv[0]) : 1.0;
    rank_ = 0;
    while (rank_ < sv.size() && sv[rank_] > 1e-10 * scale) ++rank_;
    if (d > 1 && rank_ < d)
        throw Error(ErrorCode::kRankDeficiency, "constraints have rank " + std::to_string(rank_) + " < d(A) = " +
                                                    std::to_string(d));
    row_basis_ = svd.matrixU().leftCols(rank_).transpose();
    reduced_ = row_basis_ * c_;
    null_ = svd.matrixV().rightCols(static_cast<Eigen::Index>(n) - rank_);
}

Eigen::VectorXd HodgeProblem::class_target(const LCFunction& f) const {
    return cohomology_->class_vector(basis_->space().tree(), f);
}

double HodgeProblem::energy(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    return (lambda_.array() * x.array() * y.array()).sum();
}

std::vector<LCFunction> coboundary_basis(const HodgeProblem& p) {
    std::vector<LCFunction> out;
    const auto& null = p.coboundary_coordinates();
    for (Eigen::Index j = 0; j < null.cols(); ++j) {
        const Eigen::VectorXd col = null.col(j);
        out.push_back(p.basis().synthesize(0.0, std::span<const double>(col.data(), col.size())));
    }
    return out;
}

HarmonicResult harmonic_representative(const HodgeProblem& p, const LCFunction& f) {
    const CellSpace& space = p.basis().space();
    // f may be finer than K: only its class enters.
    if (f.level > space.level()) throw Error(ErrorCode::kLevelExceedsTable, "function finer than the cell space");
    // The constant part is harmonic on its own; only f - mean(f) is minimized.
    const double mean = integrate(space, f);
    const Eigen::VectorXd target = p.class_target(f) - mean * p.class_target(constant(space, 1.0, 0));
    const Eigen::MatrixXd& c = p.constraints();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeFullU);
    const Eigen::MatrixXd u = svd.matrixU();
    const int r = p.constraint_rank();
    const Eigen::VectorXd rotated = u.transpose() * target;
    if (rotated.size() > r && rotated.tail(rotated.size() - r).norm() > 1e-9 * std::max(1.0, target.norm()))
        throw Error(ErrorCode::kInvalidArgument, "class target is inconsistent with the constraints");

    HarmonicResult out;
    const std::size_t n = p.basis().size() - 1;
    out.coordinates = Eigen::VectorXd::Zero(n);
    if (r > 0) {
        const Eigen::MatrixXd cr = u.leftCols(r).transpose() * c;
        const Eigen::VectorXd dr = rotated.head(r);
        const Eigen::VectorXd inv = p.eigenvalues().cwiseInverse();
        const Eigen::MatrixXd gram = cr * inv.asDiagonal() * cr.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        const double lo = es.eigenvalues().minCoeff();
        const double hi = es.eigenvalues().maxCoeff();
        out.condition_number = lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
        if (!(out.condition_number < 1e12))
            throw Error(ErrorCode::kSingularGram, "Gram matrix condition number " +
                                                      std::to_string(out.condition_number));
        const Eigen::VectorXd mult = gram.ldlt().solve(dr);
        out.coordinates = inv.asDiagonal() * (cr.transpose() * mult);
    }
    out.h = p.basis().synthesize(mean, std::span<const double>(out.coordinates.data(), out.coordinates.size()));
    out.energy = p.energy(out.coordinates, out.coordinates);
    out.residual = harmonicity_residual(p, out.h);
    return out;
}

double harmonicity_residual(const HodgeProblem& p, const LCFunction& h) {
    const auto coefs = p.basis().coefficients(h);
    const Eigen::Map<const Eigen::VectorXd> x(coefs.data(), static_cast<Eigen::Index>(coefs.size()));
    const double ehh = p.energy(x, x);
    if (!(ehh > 0)) return 0.0;
    const auto& null = p.coboundary_coordinates();
    double worst = 0.0;
    for (Eigen::Index j = 0; j < null.cols(); ++j) {
        const Eigen::VectorXd b = null.col(j);
        worst = std::max(worst, std::abs(p.energy(x, b)) / std::sqrt(ehh * p.energy(b, b)));
    }
    return worst;
}

std::vector<RefinementStep> refine_and_compare(const GibbsData& g, const CohomologySpace& cohomology, double gamma,
                                               const LCFunction& f, std::span<const int> levels, std::size_t cap) {
    if (levels.empty()) return {};
    if (!std::is_sorted(levels.begin(), levels.end()) ||
        std::adjacent_find(levels.begin(), levels.end()) != levels.end())
        throw Error(ErrorCode::kInvalidArgument, "levels must be strictly increasing");
    const int top = std::max(levels.back(), f.level);
    const CellSpace space(g, top, cap);
    std::vector<RefinementStep> out;
    for (int k : levels) {
        const EigenBasis basis(space, k);
        SpectrumOptions options;
        options.cap = cap;
        const SpectrumTable table = spectrum_table(g, gamma, k, options);
        const HodgeProblem problem(basis, table, cohomology);
        RefinementStep step;
        step.level = k;
        step.result = harmonic_representative(problem, f);
        if (!out.empty()) {
            const LCFunction diff = combine(space, 1.0, step.result.h, -1.0, out.back().result.h);
            step.l2_distance_to_previous = std::sqrt(l2_norm_sq(space, diff));
        }
        out.push_back(std::move(step));
    }
    return out;
}

}  // namespace cantorlap
