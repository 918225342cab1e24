#pragma once

#include "cantorlap/bratteli.hpp"
#include "cantorlap/lc_function.hpp"

#include <Eigen/Dense>
#include <gmpxx.h>

#include <map>
#include <span>
#include <vector>

namespace cantorlap {

/// Finite-depth potential: a value per admissible block of `depth` edges.
/// Blocks missing from the table count as 0.
struct Potential {
    int depth = 1;
    std::map<std::vector<int>, double> values;
};

enum class StartWeighting {
    kInvariant,  // shift-invariant equilibrium state (default)
    kConformal,  // unit start weight; tail-invariant when psi = 0
};

/// Markov description of a cylinder measure: walking down the path tree,
/// each node carries a chain state and a child's mass is the parent's mass
/// times ratio[state][slot], slot being the position of the edge among the
/// out-edges of the node's range vertex. States 0..N-1 are the vertices.
template <typename Scalar>
struct MeasureChain {
    std::vector<int> vertex;  // range vertex of each state
    std::vector<std::vector<int>> next;
    std::vector<std::vector<Scalar>> ratio;
    std::vector<Scalar> root_mass;
};

class GibbsData {
public:
    GibbsData(const Diagram& diagram, Potential potential, StartWeighting weighting = StartWeighting::kInvariant);

    const Diagram& diagram() const { return diagram_; }
    const Potential& potential() const { return potential_; }
    StartWeighting weighting() const { return weighting_; }
    int depth() const { return potential_.depth; }

    const std::vector<std::vector<int>>& blocks() const { return blocks_; }
    int block_index(std::span<const int> edges) const;  // -1 if not admissible
    double psi(int block) const { return psi_[block]; }
    double psi(std::span<const int> edges) const;

    const Eigen::MatrixXd& transfer_matrix() const { return m_; }
    double transfer_eigenvalue() const { return big_lambda_; }
    const Eigen::VectorXd& left() const { return u_; }
    const Eigen::VectorXd& right() const { return v_; }

    double pressure() const { return pressure_; }
    double integral_psi() const { return integral_psi_; }
    double entropy() const { return entropy_; }
    double relative_dimension() const { return relative_dimension_; }
    bool is_zero_potential() const { return zero_; }

    /// Admissible blocks absent from the supplied table.
    const std::vector<std::vector<int>>& missing_blocks() const { return missing_; }

    const MeasureChain<double>& chain() const { return chain_; }

    /// Mass of the cylinder of a length >= depth path, from the block formula.
    double block_formula_mass(const PathId& e) const;

private:
    double start_weight(int block) const;

    Diagram diagram_;
    Potential potential_;
    StartWeighting weighting_;
    std::vector<std::vector<int>> blocks_;
    std::map<std::vector<int>, int> block_lookup_;
    std::vector<double> psi_;
    std::vector<std::vector<int>> missing_;
    Eigen::MatrixXd m_;
    double big_lambda_ = 0.0;
    Eigen::VectorXd u_, v_;
    double v_sum_ = 0.0;
    double pressure_ = 0.0, integral_psi_ = 0.0, entropy_ = 0.0, relative_dimension_ = 0.0;
    bool zero_ = true;
    MeasureChain<double> chain_;
};

GibbsData build_gibbs(const Diagram& d, const Potential& psi, StartWeighting weighting = StartWeighting::kInvariant);

double cylinder_measure(const GibbsData& g, const PathId& e);

/// Masses of every node of the tree, level by level.
std::vector<std::vector<double>> tree_masses(const GibbsData& g, const PathTree& tree);

struct Bounds {
    double min = 0.0;
    double max = 0.0;
};

Bounds gibbs_property_ratio(const GibbsData& g, int n, std::size_t cap = kDefaultPathCap);
Bounds child_ratio_bounds(const GibbsData& g, int k_max, std::size_t cap = kDefaultPathCap);
double integrate(const GibbsData& g, const LCFunction& f, std::size_t cap = kDefaultPathCap);

struct DistortionProfile {
    std::vector<std::vector<double>> values;  // values[k][i] for the i-th path of P_k, k = 0..K
    Bounds bounds;
};
DistortionProfile distortion_profile(const GibbsData& g, int k_max, std::size_t cap = kDefaultPathCap);

/// -(1/n) sum over P_n of mu log mu.
double shannon_entropy_rate(const GibbsData& g, int n, std::size_t cap = kDefaultPathCap);

/// Exact Perron data for an integer Perron root.
struct ExactPerron {
    mpq_class lambda;
    RationalVector left;   // sum = 1
    RationalVector right;  // left . right = 1
};
ExactPerron exact_perron(const Diagram& d);  // throws NotRational

/// The psi = 0 invariant measure with rational masses.
MeasureChain<mpq_class> exact_parry_chain(const Diagram& d);

}  // namespace cantorlap
