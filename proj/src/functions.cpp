#include "cantorlap/functions.hpp"

#include "cantorlap/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cantorlap {

CellSpace::CellSpace(const GibbsData& gibbs, int level, std::size_t cap)
    : gibbs_(gibbs), tree_(gibbs.diagram(), level, cap), masses_(tree_masses(gibbs_, tree_)) {}

void check_function(const CellSpace& space, const LCFunction& f) {
    if (f.level < 0 || f.level > space.level())
        throw Error(ErrorCode::kLevelExceedsTable, "function level " + std::to_string(f.level) +
                                                       " outside the cell space");
    if (f.values.size() != space.cell_count(f.level))
        throw Error(ErrorCode::kInvalidArgument, "function size does not match |P_" + std::to_string(f.level) + "|");
    for (double v : f.values)
        if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "function values must be finite");
}

LCFunction constant(const CellSpace& space, double c, int level) {
    return {level, std::vector<double>(space.cell_count(level), c)};
}

LCFunction indicator(const CellSpace& space, const PathId& e, int level) {
    if (e.length() > level) throw Error(ErrorCode::kInvalidArgument, "indicator level below the path length");
    LCFunction f{e.length(), std::vector<double>(space.cell_count(e.length()), 0.0)};
    f.values[space.tree().index_of(e)] = 1.0;
    return lift(space, f, level);
}

LCFunction lift(const CellSpace& space, const LCFunction& f, int level) {
    check_function(space, f);
    if (level < f.level) throw Error(ErrorCode::kInvalidArgument, "lift target below the function level");
    if (level > space.level()) throw Error(ErrorCode::kLevelExceedsTable, "lift target beyond the cell space");
    const PathTree& tree = space.tree();
    LCFunction out = f;
    for (int l = f.level; l < level; ++l) {
        std::vector<double> next(tree.size(l + 1));
        for (std::size_t i = 0; i < tree.size(l); ++i)
            for (std::size_t c = tree.child_begin(l, i); c < tree.child_end(l, i); ++c) next[c] = out.values[i];
        out.values = std::move(next);
        out.level = l + 1;
    }
    return out;
}

LCFunction combine(const CellSpace& space, double a, const LCFunction& f, double b, const LCFunction& g) {
    const int level = std::max(f.level, g.level);
    LCFunction x = lift(space, f, level);
    const LCFunction y = lift(space, g, level);
    for (std::size_t i = 0; i < x.values.size(); ++i) x.values[i] = a * x.values[i] + b * y.values[i];
    return x;
}

namespace {

// integrals[l][i] = integral of f over the cell i of level l, for l <= f.level.
std::vector<std::vector<double>> cell_integrals(const CellSpace& space, const LCFunction& f) {
    check_function(space, f);
    const PathTree& tree = space.tree();
    std::vector<std::vector<double>> out(f.level + 1);
    out[f.level].resize(f.values.size());
    const auto m = space.masses(f.level);
    for (std::size_t i = 0; i < f.values.size(); ++i) out[f.level][i] = f.values[i] * m[i];
    for (int l = f.level - 1; l >= 0; --l) {
        out[l].assign(tree.size(l), 0.0);
        for (std::size_t i = 0; i < tree.size(l); ++i)
            for (std::size_t c = tree.child_begin(l, i); c < tree.child_end(l, i); ++c) out[l][i] += out[l + 1][c];
    }
    return out;
}

}  // namespace

LCFunction project(const CellSpace& space, const LCFunction& f, int k) {
    if (k < 0 || k > f.level) throw Error(ErrorCode::kInvalidArgument, "projection level out of range");
    if (k == f.level) return f;
    const auto integrals = cell_integrals(space, f);
    LCFunction out{k, integrals[k]};
    const auto m = space.masses(k);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] /= m[i];
    return out;
}

LCFunction delta(const CellSpace& space, const LCFunction& f, int k) {
    if (k < 1 || k > f.level) throw Error(ErrorCode::kInvalidArgument, "delta level out of range");
    return combine(space, 1.0, project(space, f, k), -1.0, project(space, f, k - 1));
}

double integrate(const CellSpace& space, const LCFunction& f) {
    check_function(space, f);
    const auto m = space.masses(f.level);
    double total = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) total += f.values[i] * m[i];
    return total;
}

double inner(const CellSpace& space, const LCFunction& f, const LCFunction& g) {
    const int level = std::max(f.level, g.level);
    const LCFunction x = lift(space, f, level);
    const LCFunction y = lift(space, g, level);
    const auto m = space.masses(level);
    double total = 0.0;
    for (std::size_t i = 0; i < x.values.size(); ++i) total += x.values[i] * y.values[i] * m[i];
    return total;
}

double l2_norm_sq(const CellSpace& space, const LCFunction& f) { return inner(space, f, f); }

double sup_norm(const LCFunction& f) {
    double s = 0.0;
    for (double x : f.values) s = std::max(s, std::abs(x));
    return s;
}

namespace {

// Weighted Gram-Schmidt on candidates chi_c - (mu_c / mu_parent) for the
// first n-1 children.
Eigen::MatrixXd orthonormal_family(std::span<const double> child_mass, double parent_mass) {
    const auto n = static_cast<Eigen::Index>(child_mass.size());
    Eigen::VectorXd w(n);
    for (Eigen::Index c = 0; c < n; ++c) {
        w[c] = child_mass[c];
        if (!(w[c] > std::numeric_limits<double>::min()) || !std::isfinite(w[c]))
            throw Error(ErrorCode::kGramSchmidtBreakdown, "child cylinder mass underflows");
    }
    Eigen::MatrixXd q(n, n - 1);
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        Eigen::VectorXd x = Eigen::VectorXd::Constant(n, -w[j] / parent_mass);
        x[j] += 1.0;
        const double before = std::sqrt((w.array() * x.array().square()).sum());
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index i = 0; i < j; ++i) x -= (w.array() * q.col(i).array() * x.array()).sum() * q.col(i);
        const double norm = std::sqrt((w.array() * x.array().square()).sum());
        if (!(norm > 1e-10 * before))
            throw Error(ErrorCode::kGramSchmidtBreakdown, "candidate vanished during orthogonalization");
        q.col(j) = x / norm;
    }
    return q;
}

}  // namespace

EigenBasis::EigenBasis(const CellSpace& space, int level) : space_(&space), level_(level) {
    if (level < 1 || level > space.level())
        throw Error(ErrorCode::kInvalidArgument, "basis level must lie in [1, space level]");
    const PathTree& tree = space.tree();
    const std::size_t n0 = tree.size(0);
    if (n0 > 1) {
        BasisBlock b;
        b.level = -1;
        b.child_count = static_cast<int>(n0);
        b.vectors = orthonormal_family(space.masses(0), 1.0);
        root_block_ = 0;
        blocks_.push_back(std::move(b));
    }
    block_of_node_.resize(level);
    for (int k = 0; k < level; ++k) {
        block_of_node_[k].assign(tree.size(k), -1);
        const auto masses = space.masses(k);
        const auto child_masses = space.masses(k + 1);
        for (std::size_t i = 0; i < tree.size(k); ++i) {
            const std::size_t c0 = tree.child_begin(k, i);
            const std::size_t c1 = tree.child_end(k, i);
            if (c1 - c0 < 2) continue;
            BasisBlock b;
            b.level = k;
            b.node = i;
            b.child_begin = c0;
            b.child_count = static_cast<int>(c1 - c0);
            b.vectors = orthonormal_family(child_masses.subspan(c0, c1 - c0), masses[i]);
            block_of_node_[k][i] = static_cast<long>(blocks_.size());
            blocks_.push_back(std::move(b));
        }
    }
    offsets_.reserve(blocks_.size());
    std::size_t offset = 0;
    for (const auto& b : blocks_) {
        offsets_.push_back(offset);
        offset += b.dimension();
    }
    size_ = offset + 1;
}

long EigenBasis::block_at(int k, std::size_t i) const {
    if (k == -1) return root_block_;
    if (k < 0 || k >= level_) return -1;
    return block_of_node_[k][i];
}

std::vector<double> EigenBasis::coefficients(const LCFunction& f) const {
    if (f.level > level_) throw Error(ErrorCode::kLevelExceedsTable, "function finer than the basis");
    const auto integrals = cell_integrals(*space_, f);
    std::vector<double> out(size_ - 1, 0.0);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        const auto& block = blocks_[b];
        const int child_level = block.level + 1;
        if (child_level > f.level) continue;
        const auto& ints = integrals[child_level];
        for (int l = 0; l < block.dimension(); ++l) {
            double s = 0.0;
            for (int c = 0; c < block.child_count; ++c) s += block.vectors(c, l) * ints[block.child_begin + c];
            out[offsets_[b] + l] = s;
        }
    }
    return out;
}

LCFunction EigenBasis::synthesize(double mean, std::span<const double> coefficients) const {
    if (coefficients.size() != size_ - 1) throw Error(ErrorCode::kInvalidArgument, "coefficient count mismatch");
    const PathTree& tree = space_->tree();
    std::vector<double> values(tree.size(0), mean);
    if (root_block_ >= 0) {
        const auto& block = blocks_[root_block_];
        for (int c = 0; c < block.child_count; ++c)
            for (int l = 0; l < block.dimension(); ++l)
                values[c] += block.vectors(c, l) * coefficients[offsets_[root_block_] + l];
    }
    for (int k = 0; k < level_; ++k) {
        std::vector<double> next(tree.size(k + 1));
        for (std::size_t i = 0; i < tree.size(k); ++i) {
            const std::size_t c0 = tree.child_begin(k, i);
            for (std::size_t c = c0; c < tree.child_end(k, i); ++c) next[c] = values[i];
            const long b = block_of_node_[k][i];
            if (b < 0) continue;
            const auto& block = blocks_[b];
            for (int c = 0; c < block.child_count; ++c)
                for (int l = 0; l < block.dimension(); ++l)
                    next[c0 + c] += block.vectors(c, l) * coefficients[offsets_[b] + l];
        }
        values = std::move(next);
    }
    return {level_, std::move(values)};
}

LCFunction EigenBasis::function(std::size_t j) const {
    std::vector<double> coefs(size_ - 1, 0.0);
    coefs.at(j) = 1.0;
    return synthesize(0.0, coefs);
}

double EigenBasis::value(std::size_t b, int l, std::size_t x) const {
    const auto& block = blocks_.at(b);
    const std::size_t a = space_->tree().ancestor(level_, x, block.level + 1);
    if (a < block.child_begin || a >= block.child_begin + block.child_count) return 0.0;
    return block.vectors(a - block.child_begin, l);
}

EigenBasis build_eigenbasis(const CellSpace& space, int level) { return EigenBasis(space, level); }

Decomposition parseval_decompose(const EigenBasis& basis, const LCFunction& f) {
    return {integrate(basis.space(), f), basis.coefficients(f)};
}

double sr_norm(const CellSpace& space, const LCFunction& f, double r) {
    if (!(r > 0)) throw Error(ErrorCode::kInvalidArgument, "r must be positive");
    double total = 0.0;
    for (int k = 1; k <= f.level; ++k) total += std::pow(space.lambda(), r * k) * sup_norm(delta(space, f, k));
    return total;
}

double holder_seminorm(const CellSpace& space, const LCFunction& f, double r) {
    check_function(space, f);
    const PathTree& tree = space.tree();
    // Subtree extrema, bottom-up.
    std::vector<std::vector<double>> hi(f.level + 1), lo(f.level + 1);
    hi[f.level] = lo[f.level] = f.values;
    for (int l = f.level - 1; l >= 0; --l) {
        hi[l].assign(tree.size(l), -std::numeric_limits<double>::infinity());
        lo[l].assign(tree.size(l), std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < tree.size(l); ++i)
            for (std::size_t c = tree.child_begin(l, i); c < tree.child_end(l, i); ++c) {
                hi[l][i] = std::max(hi[l][i], hi[l + 1][c]);
                lo[l][i] = std::min(lo[l][i], lo[l + 1][c]);
            }
    }
    // Cells in different subtrees [begin, end) below a common node sit at
    // distance lambda^-j, j the level of that node.
    auto spread = [&](int l, std::size_t begin, std::size_t end) {
        double best = 0.0;
        for (std::size_t a = begin; a < end; ++a)
            for (std::size_t b = begin; b < end; ++b)
                if (a != b) best = std::max(best, hi[l][a] - lo[l][b]);
        return best;
    };
    double out = spread(0, 0, tree.size(0));
    for (int l = 0; l < f.level; ++l) {
        const double scale = std::pow(space.lambda(), r * l);
        for (std::size_t i = 0; i < tree.size(l); ++i)
            out = std::max(out, scale * spread(l + 1, tree.child_begin(l, i), tree.child_end(l, i)));
    }
    return out;
}

}  // namespace cantorlap
