#pragma once

// Dense reference computations used to cross-check the structured code paths.
// Nothing here goes through EigenBasis or SpectrumTable.

#include "cantorlap/functions.hpp"
#include "cantorlap/gibbs.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using namespace cantorlap;

inline Diagram diagram(std::initializer_list<std::initializer_list<long long>> rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    IntMatrix a(n, n);
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        Eigen::Index j = 0;
        for (long long x : row) a(i, j++) = x;
        ++i;
    }
    return Diagram(a);
}

inline Diagram a2() { return diagram({{2}}); }
inline Diagram a4() { return diagram({{4}}); }
inline Diagram full2() { return diagram({{1, 1}, {1, 1}}); }
inline Diagram fibonacci() { return diagram({{1, 1}, {1, 0}}); }

inline GibbsData zero(const Diagram& d) { return GibbsData(d, Potential{}); }

/// Depth-1 potential on A=(2) with psi(edge 0) = beta.
inline GibbsData bernoulli(double beta) {
    Potential p;
    p.depth = 1;
    p.values[{0}] = beta;
    p.values[{1}] = 0.0;
    return GibbsData(a2(), p);
}

/// psi(edge) = 0.1 * (edge + 1): a generic depth-1 potential on any diagram.
inline GibbsData ramp(const Diagram& d) {
    Potential p;
    for (int e = 0; e < d.edge_count(); ++e) p.values[{e}] = 0.1 * (e + 1);
    return GibbsData(d, p);
}

/// Laplacian-type matrix L with E(f,f) = f^T L f over level-K cells, built from
/// pairwise weights mu_a mu_b lambda^{gamma j(a,b)}.
inline Eigen::MatrixXd form_matrix(const CellSpace& space, double gamma) {
    const int k = space.level();
    const auto& tree = space.tree();
    const auto mu = space.masses(k);
    const auto n = static_cast<Eigen::Index>(tree.size(k));
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    std::vector<PathId> paths;
    for (Eigen::Index i = 0; i < n; ++i) paths.push_back(tree.path(k, i));
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
            if (a == b) continue;
            int j = 0;
            if (paths[a].source == paths[b].source)
                while (j < k && paths[a].edges[j] == paths[b].edges[j]) ++j;
            w(a, b) = mu[a] * mu[b] * std::pow(space.lambda(), gamma * j);
        }
    Eigen::MatrixXd l = -w;
    l.diagonal() = w.rowwise().sum();
    return l;
}

inline Eigen::VectorXd mass_vector(const CellSpace& space) {
    const auto mu = space.masses(space.level());
    return Eigen::Map<const Eigen::VectorXd>(mu.data(), static_cast<Eigen::Index>(mu.size()));
}

struct DenseSpectrum {
    Eigen::VectorXd values;   // ascending, including the 0 of constants
    Eigen::MatrixXd vectors;  // mu-orthonormal columns
};

/// Generalized eigenproblem L v = lambda diag(mu) v.
inline DenseSpectrum dense_spectrum(const CellSpace& space, double gamma) {
    const Eigen::MatrixXd l = form_matrix(space, gamma);
    const Eigen::VectorXd mu = mass_vector(space);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(l, Eigen::MatrixXd(mu.asDiagonal()));
    return {es.eigenvalues(), es.eigenvectors()};
}

/// (value, multiplicity) pairs after merging within a relative tolerance.
inline std::vector<std::pair<double, int>> merge(const Eigen::VectorXd& values, double rel = 1e-9) {
    std::vector<std::pair<double, int>> out;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (!out.empty() && std::abs(v - out.back().first) <= rel * std::max(1.0, std::abs(v)))
            ++out.back().second;
        else
            out.emplace_back(v, 1);
    }
    return out;
}

/// Direct heat kernel from the dense spectrum at cells x, y.
inline double dense_heat(const DenseSpectrum& s, Eigen::Index x, Eigen::Index y, double t) {
    double p = 0.0;
    for (Eigen::Index n = 0; n < s.values.size(); ++n)
        p += std::exp(-t * s.values[n]) * s.vectors(x, n) * s.vectors(y, n);
    return p;
}

inline LCFunction random_function(const CellSpace& space, int level, std::mt19937_64& rng) {
    std::normal_distribution<double> dist;
    LCFunction f{level, std::vector<double>(space.cell_count(level))};
    for (double& v : f.values) v = dist(rng);
    return f;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max({1e-300, std::abs(a), std::abs(b)}); }

}  // namespace oracle
