#include "oracle.hpp"

#include "cantorlap/functions.hpp"

#include <doctest.h>

#include <cmath>

using namespace cantorlap;

TEST_CASE("projections and martingale differences") {
    const GibbsData g = oracle::ramp(oracle::fibonacci());
    const CellSpace space(g, 6);
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const LCFunction f = oracle::random_function(space, 6, rng);
        CHECK(project(space, f, 6).values == f.values);
        // telescoping: Pi_0 f + sum delta_k f = f
        LCFunction sum = lift(space, project(space, f, 0), 6);
        for (int k = 1; k <= 6; ++k) sum = combine(space, 1.0, sum, 1.0, delta(space, f, k));
        for (std::size_t i = 0; i < f.values.size(); ++i) CHECK(sum.values[i] == doctest::Approx(f.values[i]).epsilon(1e-12));
        // delta_k f integrates to zero on every level-(k-1) cell
        for (int k = 1; k <= 6; ++k) {
            const LCFunction dk = delta(space, f, k);
            const LCFunction back = project(space, dk, k - 1);
            for (double v : back.values) CHECK(std::abs(v) < 1e-12);
        }
        CHECK(integrate(space, lift(space, f, 6)) == doctest::Approx(integrate(space, f)).epsilon(1e-14));
    }
    const CellSpace dyadic(oracle::zero(oracle::a2()), 3);
    const LCFunction chi_a = indicator(dyadic, PathId::parse("0:0"), 3);
    CHECK(project(dyadic, chi_a, 0).values == std::vector<double>{0.5});
    const LCFunction one = constant(dyadic, 1.0, 3);
    for (int k = 1; k <= 3; ++k)
        for (double v : delta(dyadic, one, k).values) CHECK(v == 0.0);
}

TEST_CASE("function checks") {
    const CellSpace space(oracle::zero(oracle::a2()), 3);
    CHECK_THROWS_AS(check_function(space, LCFunction{4, std::vector<double>(16)}), Error);
    CHECK_THROWS_AS(check_function(space, LCFunction{2, std::vector<double>(3)}), Error);
    CHECK_THROWS_AS(check_function(space, LCFunction{1, {1.0, NAN}}), Error);
}

TEST_CASE("eigenbasis structure") {
    const CellSpace dyadic(oracle::zero(oracle::a2()), 1);
    const EigenBasis b1(dyadic, 1);
    REQUIRE(b1.size() == 2);
    const LCFunction psi = b1.function(0);
    CHECK(std::abs(psi.values[0]) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(psi.values[1] == doctest::Approx(-psi.values[0]).epsilon(1e-15));

    const CellSpace full(oracle::zero(oracle::full2()), 2);
    CHECK(EigenBasis(full, 2).size() == 8);

    for (const GibbsData& g : {oracle::ramp(oracle::fibonacci()), oracle::bernoulli(0.7), oracle::ramp(oracle::full2())}) {
        const CellSpace space(g, 4);
        const EigenBasis basis(space, 4);
        REQUIRE(basis.size() == space.cell_count(4));
        const std::size_t n = basis.size() - 1;
        std::vector<LCFunction> fs;
        for (std::size_t j = 0; j < n; ++j) fs.push_back(basis.function(j));
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(std::abs(integrate(space, fs[i])) < 1e-13);
            for (std::size_t j = i; j < n; ++j)
                CHECK(inner(space, fs[i], fs[j]) == doctest::Approx(i == j ? 1.0 : 0.0).scale(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("Parseval and synthesis") {
    std::mt19937_64 rng(5);
    for (const GibbsData& g : {oracle::zero(oracle::a2()), oracle::ramp(oracle::fibonacci()), oracle::ramp(oracle::a4())}) {
        const CellSpace space(g, 3);
        const EigenBasis basis(space, 3);
        for (int trial = 0; trial < 100; ++trial) {
            const LCFunction f = oracle::random_function(space, 3, rng);
            const Decomposition d = parseval_decompose(basis, f);
            double sum = d.mean * d.mean;
            for (double c : d.coefficients) sum += c * c;
            CHECK(sum == doctest::Approx(l2_norm_sq(space, f)).epsilon(1e-10));
            const LCFunction back = basis.synthesize(d.mean, d.coefficients);
            for (std::size_t i = 0; i < f.values.size(); ++i) CHECK(back.values[i] == doctest::Approx(f.values[i]).epsilon(1e-11));
        }
        const Decomposition one = parseval_decompose(basis, constant(space, 1.0, 0));
        CHECK(one.mean == doctest::Approx(1.0).epsilon(1e-14));
        for (double c : one.coefficients) CHECK(std::abs(c) < 1e-13);
        const Decomposition unit = parseval_decompose(basis, basis.function(2));
        for (std::size_t j = 0; j < unit.coefficients.size(); ++j)
            CHECK(unit.coefficients[j] == doctest::Approx(j == 2 ? 1.0 : 0.0).scale(1.0).epsilon(1e-12));
    }
}

TEST_CASE("delta isolates a basis block") {
    const CellSpace space(oracle::ramp(oracle::fibonacci()), 5);
    const EigenBasis basis(space, 5);
    for (std::size_t b = 0; b < basis.blocks().size(); ++b) {
        const BasisBlock& block = basis.blocks()[b];
        const int j = block.level;  // -1 for the vertex partition
        const LCFunction u = basis.function(basis.block_offset(b));
        for (int k = 1; k <= 5; ++k) {
            const double norm = sup_norm(delta(space, u, k));
            if (k == j + 1)
                CHECK(norm == doctest::Approx(sup_norm(u)).epsilon(1e-12));
            else if (j >= 0)
                CHECK(norm < 1e-12);
        }
    }
}

TEST_CASE("regularity norms") {
    const CellSpace dyadic(oracle::zero(oracle::a2()), 4);
    CHECK(sr_norm(dyadic, constant(dyadic, 3.0, 4), 1.0) == 0.0);
    CHECK(holder_seminorm(dyadic, constant(dyadic, 3.0, 4), 1.0) == 0.0);
    const LCFunction chi_a = indicator(dyadic, PathId::parse("0:0"), 4);
    CHECK(holder_seminorm(dyadic, chi_a, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    const LCFunction scaled = combine(dyadic, -2.5, chi_a, 0.0, chi_a);
    CHECK(holder_seminorm(dyadic, scaled, 1.0) == doctest::Approx(2.5).epsilon(1e-15));

    const EigenBasis basis(dyadic, 4);
    for (std::size_t b = 0; b < basis.blocks().size(); ++b) {
        const int j = basis.blocks()[b].level;
        const LCFunction u = basis.function(basis.block_offset(b));
        CHECK(sr_norm(dyadic, u, 0.7) == doctest::Approx(std::pow(2.0, 0.7 * (j + 1)) * sup_norm(u)).epsilon(1e-12));
    }

    // continuous inclusion of Hoelder functions into S_r for s > r
    std::mt19937_64 rng(3);
    const double r = 0.5, s = 1.0, lam = 2.0;
    const double factor = 2 * std::pow(lam, r - s) / (1 - std::pow(lam, r - s));
    for (int trial = 0; trial < 20; ++trial) {
        const LCFunction f = oracle::random_function(dyadic, 4, rng);
        CHECK(sr_norm(dyadic, f, r) <= factor * holder_seminorm(dyadic, f, s) * (1 + 1e-12));
    }
}
