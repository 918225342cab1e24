#pragma once

#include "cantorlap/bratteli.hpp"
#include "cantorlap/gibbs.hpp"
#include "cantorlap/lc_function.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace cantorlap {

/// Path tree of depth K together with the cylinder masses of every node.
class CellSpace {
public:
    CellSpace(const GibbsData& gibbs, int level, std::size_t cap = kDefaultPathCap);

    const GibbsData& gibbs() const { return gibbs_; }
    const Diagram& diagram() const { return gibbs_.diagram(); }
    const PathTree& tree() const { return tree_; }
    int level() const { return tree_.depth(); }
    std::size_t cell_count(int k) const { return tree_.size(k); }
    std::span<const double> masses(int k) const { return masses_.at(k); }
    double lambda() const { return diagram().lambda(); }

private:
    GibbsData gibbs_;
    PathTree tree_;
    std::vector<std::vector<double>> masses_;
};

void check_function(const CellSpace& space, const LCFunction& f);

LCFunction constant(const CellSpace& space, double c, int level);
LCFunction indicator(const CellSpace& space, const PathId& e, int level);
LCFunction lift(const CellSpace& space, const LCFunction& f, int level);
/// a f + b g at the finer of the two levels.
LCFunction combine(const CellSpace& space, double a, const LCFunction& f, double b, const LCFunction& g);

/// Cylinder averages on P_k; k = 0 gives the per-vertex conditional expectation.
LCFunction project(const CellSpace& space, const LCFunction& f, int k);
/// Pi_k f - Pi_{k-1} f, returned at level k (k >= 1).
LCFunction delta(const CellSpace& space, const LCFunction& f, int k);

double integrate(const CellSpace& space, const LCFunction& f);
double inner(const CellSpace& space, const LCFunction& f, const LCFunction& g);
double l2_norm_sq(const CellSpace& space, const LCFunction& f);
double sup_norm(const LCFunction& f);

/// One orthonormal family: either the vertex partition of V_0 (level -1) or
/// Y(e) for a branching node e. `vectors(c, l)` is the value of the l-th
/// function on the c-th child cell.
struct BasisBlock {
    int level = -1;
    std::size_t node = 0;
    std::size_t child_begin = 0;
    int child_count = 0;
    Eigen::MatrixXd vectors;

    int dimension() const { return static_cast<int>(vectors.cols()); }
};

/// Orthonormal eigenbasis of the level-K functions. The space passed in must
/// outlive the basis.
class EigenBasis {
public:
    EigenBasis(const CellSpace& space, int level);

    const CellSpace& space() const { return *space_; }
    int level() const { return level_; }
    std::size_t size() const { return size_; }  // includes the constant, equals |P_K|
    std::span<const BasisBlock> blocks() const { return blocks_; }
    std::size_t block_offset(std::size_t b) const { return offsets_[b]; }
    /// Block generated by node i of level k (k = -1 for the vertex partition), or -1.
    long block_at(int k, std::size_t i) const;

    /// Coefficients of every non-constant basis function, in block order.
    std::vector<double> coefficients(const LCFunction& f) const;
    LCFunction synthesize(double mean, std::span<const double> coefficients) const;
    /// The j-th non-constant basis function.
    LCFunction function(std::size_t j) const;

    /// Value of the l-th function of block b on the level-K cell x.
    double value(std::size_t b, int l, std::size_t x) const;

private:
    const CellSpace* space_;
    int level_;
    std::size_t size_ = 1;
    std::vector<BasisBlock> blocks_;
    std::vector<std::size_t> offsets_;
    long root_block_ = -1;
    std::vector<std::vector<long>> block_of_node_;
};

EigenBasis build_eigenbasis(const CellSpace& space, int level);

struct Decomposition {
    double mean = 0.0;
    std::vector<double> coefficients;
};
Decomposition parseval_decompose(const EigenBasis& basis, const LCFunction& f);

double sr_norm(const CellSpace& space, const LCFunction& f, double r);
double holder_seminorm(const CellSpace& space, const LCFunction& f, double r);

}  // namespace cantorlap
