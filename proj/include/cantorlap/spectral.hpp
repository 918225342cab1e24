#pragma once

#include "cantorlap/bratteli.hpp"
#include "cantorlap/functions.hpp"
#include "cantorlap/gibbs.hpp"

#include <gmpxx.h>

#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace cantorlap {

/// Rejects gamma below the relative dimension (the spectrum would
/// accumulate). gamma == d_psi is accepted: the spectrum is still discrete.
void require_gamma(const GibbsData& g, double gamma);
/// Strict version used where 1/(gamma - d_psi) enters.
void require_gamma_strict(const GibbsData& g, double gamma);

/// Eigenvalue on Y(e) for a branching path e, summed over the annuli around
/// C_e. Level-0 vertices are allowed; the vertex partition has eigenvalue 1.
double eigenvalue(const GibbsData& g, const PathId& e, double gamma);
/// lambda(e) - lambda(parent) predicted by the ancestor recursion.
double ancestor_gap(const GibbsData& g, const PathId& e, double gamma);

struct SpectrumEntry {
    double value = 0.0;
    std::uint64_t multiplicity = 0;
    int level = -1;              // -1: the vertex partition of V_0
    std::uint64_t generator = 0;  // index in P_level of the first generator
};

struct SpectrumTable {
    double gamma = 0.0;
    int level = 0;  // generators at levels 0..level-1
    std::vector<SpectrumEntry> entries;  // ascending, ties merged
    /// One value per generator, in eigenbasis block order (vertex partition
    /// first, then each level in path order).
    std::vector<double> block_values;
    std::vector<int> block_dims;
    /// Smallest eigenvalue generated at `level`; everything below it is listed.
    double completeness_threshold = std::numeric_limits<double>::infinity();

    std::uint64_t total_multiplicity() const;
};

struct SpectrumOptions {
    std::size_t cap = kDefaultPathCap;
    unsigned threads = 1;
    bool keep_blocks = true;
};

SpectrumTable spectrum_table(const GibbsData& g, double gamma, int level, const SpectrumOptions& options = {});
/// Generator path of an entry ("root" entries return the empty path of vertex 0).
PathId generator_path(const Diagram& d, int level, std::uint64_t index);

struct ExactSpectrumEntry {
    mpq_class value;
    std::uint64_t multiplicity = 0;
    int level = -1;
    std::uint64_t generator = 0;
};

struct ExactSpectrumTable {
    long gamma = 0;
    int level = 0;
    std::vector<ExactSpectrumEntry> entries;
    mpq_class completeness_threshold;
};

/// psi = 0, integer Perron root and integer gamma: all eigenvalues rational.
ExactSpectrumTable exact_spectrum_table(const Diagram& d, long gamma, int level,
                                        const SpectrumOptions& options = {});

double dirichlet_eigen(const EigenBasis& basis, const SpectrumTable& table, const LCFunction& f,
                       const LCFunction& g);
/// Direct double sum over pairs of distinct cells.
double dirichlet_bruteforce(const CellSpace& space, double gamma, const LCFunction& f, const LCFunction& g,
                            std::size_t pair_cap = 100'000'000);

std::uint64_t counting_function(const SpectrumTable& table, double big_lambda);

struct WeylFit {
    double slope = 0.0;
    double expected_slope = 0.0;
    double intercept = 0.0;
    double band_min = 0.0;  // min of N(L) L^{-expected}
    double band_max = 0.0;
    double window_lo = 0.0, window_hi = 0.0;
    int points = 0;
    int levels = 0;
};

WeylFit weyl_fit(const SpectrumTable& table, double d_psi, double lo, double hi);
/// Window [sqrt(threshold), threshold).
WeylFit weyl_fit(const SpectrumTable& table, double d_psi);

struct HeatValue {
    double value = 0.0;
    double tail_bound = 0.0;  // 0 for distinct cells; may be +inf
};

/// x, y are level-K paths (K = basis level).
HeatValue heat_kernel(const EigenBasis& basis, const SpectrumTable& table, const PathId& x, const PathId& y,
                      double t, double tolerance = std::numeric_limits<double>::infinity());
HeatValue heat_kernel(const EigenBasis& basis, const SpectrumTable& table, std::size_t x, std::size_t y, double t,
                      double tolerance = std::numeric_limits<double>::infinity());

double heat_profile(double t, double distance, double gamma, double d_psi);

struct HeatEstimate {
    double c1 = 0.0;
    double c2 = 0.0;
    double ratio = 0.0;
    int samples = 0;
};
HeatEstimate heat_estimate_check(const EigenBasis& basis, const SpectrumTable& table, double d_psi,
                                 std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                 std::span<const double> times);

struct PoincareResult {
    double energy = 0.0;
    double variance = 0.0;
    bool pass = false;
};
PoincareResult poincare_check(const EigenBasis& basis, const SpectrumTable& table, const LCFunction& f);

/// sum_k lambda^{(gamma - d_psi) k} ||delta_k f||^2 / E(f, f).
double l2w_ratio(const EigenBasis& basis, const SpectrumTable& table, const LCFunction& f);

/// Weighted cylinder identities: pair sum over i < j, the expanded middle
/// form and the centred form.
double cylinder_pair_sum(std::span<const double> w, std::span<const double> a, std::span<const double> b);
double cylinder_mid_step(std::span<const double> w, std::span<const double> a, std::span<const double> b);
double cylinder_centered(std::span<const double> w, std::span<const double> a, std::span<const double> b);

/// Integral of (f(x) - f(y))^2 d^-gamma over C_{e a} x C_{e b}, e the node at
/// level k, a and b child positions.
double cross_cylinder_energy(const CellSpace& space, double gamma, const LCFunction& f, int k, std::size_t node,
                             int child_a, int child_b);

}  // namespace cantorlap
