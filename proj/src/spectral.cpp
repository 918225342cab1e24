#include "cantorlap/spectral.hpp"

#include "cantorlap/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace cantorlap {

namespace {

constexpr double kGammaSlack = 1e-12;

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
    if (threads <= 1 || n < 4096) {
        fn(std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([=, &fn] { fn(begin, end); });
    }
    for (auto& th : pool) th.join();
}

// Streams the path tree level by level carrying, per node, its chain state,
// mass and the annulus sum S(e) = sum over points outside C_e of
// mu * d^-gamma. Generators are emitted in eigenbasis block order; the
// smallest eigenvalue among level-K generators is returned via `threshold`.
template <typename Scalar, typename Scale, typename Emit>
void walk_spectrum(const Diagram& d, const MeasureChain<Scalar>& chain, int level, const SpectrumOptions& options,
                   Scale scale, Emit emit, Scalar& threshold, bool& has_threshold) {
    if (level < 1) throw Error(ErrorCode::kInvalidArgument, "spectrum level must be at least 1");
    if (d.path_count(level - 1) > options.cap)
        throw Error(ErrorCode::kCapacityExceeded, "|P_" + std::to_string(level - 1) + "| exceeds the path cap");

    const int n = d.vertex_count();
    if (n > 1) emit(-1, std::uint64_t{0}, Scalar(1), static_cast<std::uint64_t>(n - 1));

    std::vector<int> state(n);
    std::vector<Scalar> mass(n), annulus(n);
    for (int v = 0; v < n; ++v) {
        state[v] = v;
        mass[v] = chain.root_mass[v];
        annulus[v] = Scalar(1) - mass[v];
    }
    auto degree = [&](int s) { return static_cast<int>(chain.next[s].size()); };

    has_threshold = false;
    for (int l = 0; l < level; ++l) {
        const Scalar sc = scale(l);
        for (std::size_t i = 0; i < state.size(); ++i) {
            const int deg = degree(state[i]);
            if (deg >= 2) {
                Scalar value = mass[i] * sc + annulus[i];
                emit(l, static_cast<std::uint64_t>(i), value, static_cast<std::uint64_t>(deg - 1));
            }
        }
        if (l + 1 == level) {
            // Level-K generators: only their minimum is needed.
            const Scalar sc_next = scale(l + 1);
            for (std::size_t i = 0; i < state.size(); ++i) {
                const int s = state[i];
                for (int slot = 0; slot < degree(s); ++slot) {
                    const int t = chain.next[s][slot];
                    if (degree(t) < 2) continue;
                    Scalar child_mass = mass[i] * chain.ratio[s][slot];
                    Scalar value = child_mass * sc_next + annulus[i] + (mass[i] - child_mass) * sc;
                    if (!has_threshold || value < threshold) {
                        threshold = value;
                        has_threshold = true;
                    }
                }
            }
            break;
        }
        std::vector<std::size_t> offset(state.size() + 1, 0);
        for (std::size_t i = 0; i < state.size(); ++i) offset[i + 1] = offset[i] + degree(state[i]);
        const std::size_t next_size = offset.back();
        std::vector<int> next_state(next_size);
        std::vector<Scalar> next_mass(next_size), next_annulus(next_size);
        parallel_for(state.size(), options.threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const int s = state[i];
                for (int slot = 0; slot < degree(s); ++slot) {
                    const std::size_t c = offset[i] + slot;
                    next_state[c] = chain.next[s][slot];
                    next_mass[c] = mass[i] * chain.ratio[s][slot];
                    next_annulus[c] = annulus[i] + (mass[i] - next_mass[c]) * sc;
                }
            }
        });
        state = std::move(next_state);
        mass = std::move(next_mass);
        annulus = std::move(next_annulus);
    }
}

}  // namespace

void require_gamma(const GibbsData& g, double gamma) {
    if (!(gamma >= g.relative_dimension() - kGammaSlack))
        throw Error(ErrorCode::kGammaTooSmall, "gamma = " + std::to_string(gamma) +
                                                   " is below the relative dimension " +
                                                   std::to_string(g.relative_dimension()));
}

void require_gamma_strict(const GibbsData& g, double gamma) {
    if (!(gamma > g.relative_dimension() + kGammaSlack))
        throw Error(ErrorCode::kGammaTooSmall, "gamma = " + std::to_string(gamma) +
                                                   " must exceed the relative dimension " +
                                                   std::to_string(g.relative_dimension()));
}

double eigenvalue(const GibbsData& g, const PathId& e, double gamma) {
    require_gamma(g, gamma);
    const Diagram& d = g.diagram();
    check_path(d, e);
    const int k = e.length();
    if (k == 0) return 1.0;
    if (d.out_degree(range_of(d, e)) < 2)
        throw Error(ErrorCode::kInvalidArgument, "path " + e.to_string() + " does not branch");
    const double lam = d.lambda();
    double value = cylinder_measure(g, e) * std::pow(cylinder_diameter(d, e), -gamma);
    value += 1.0 - cylinder_measure(g, prefix(e, 0));  // other sources, at distance 1
    double outer = cylinder_measure(g, prefix(e, 0));
    for (int i = 0; i < k; ++i) {
        const double inner_mass = cylinder_measure(g, prefix(e, i + 1));
        value += (outer - inner_mass) * std::pow(lam, i * gamma);
        outer = inner_mass;
    }
    return value;
}

double ancestor_gap(const GibbsData& g, const PathId& e, double gamma) {
    const Diagram& d = g.diagram();
    if (e.length() < 1) throw Error(ErrorCode::kInvalidArgument, "path has no parent");
    const PathId parent = prefix(e, e.length() - 1);
    if (d.out_degree(range_of(d, e)) < 2 || d.out_degree(range_of(d, parent)) < 2)
        throw Error(ErrorCode::kInvalidArgument, "ancestor recursion needs branching parent and child");
    return cylinder_measure(g, e) *
           (std::pow(cylinder_diameter(d, e), -gamma) - std::pow(cylinder_diameter(d, parent), -gamma));
}

std::uint64_t SpectrumTable::total_multiplicity() const {
    std::uint64_t total = 0;
    for (const auto& e : entries) total += e.multiplicity;
    return total;
}

SpectrumTable spectrum_table(const GibbsData& g, double gamma, int level, const SpectrumOptions& options) {
    require_gamma(g, gamma);
    const Diagram& d = g.diagram();
    SpectrumTable table;
    table.gamma = gamma;
    table.level = level;
    std::vector<SpectrumEntry> raw;
    const double lam = d.lambda();
    auto scale = [&](int k) { return std::pow(lam, k * gamma); };
    auto emit = [&](int l, std::uint64_t i, double value, std::uint64_t mult) {
        raw.push_back({value, mult, l, i});
        if (options.keep_blocks) {
            table.block_values.push_back(value);
            table.block_dims.push_back(static_cast<int>(mult));
        }
    };
    double threshold = 0.0;
    bool has_threshold = false;
    walk_spectrum<double>(d, g.chain(), level, options, scale, emit, threshold, has_threshold);
    table.completeness_threshold = has_threshold ? threshold : std::numeric_limits<double>::infinity();

    std::stable_sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
    for (const auto& r : raw) {
        if (!table.entries.empty() &&
            r.value - table.entries.back().value <= 1e-12 * std::abs(table.entries.back().value)) {
            table.entries.back().multiplicity += r.multiplicity;
        } else {
            table.entries.push_back(r);
        }
    }
    return table;
}

PathId generator_path(const Diagram& d, int level, std::uint64_t index) {
    if (level < 0) return PathId{0, {}};
    return path_at(d, level, index);
}

ExactSpectrumTable exact_spectrum_table(const Diagram& d, long gamma, int level, const SpectrumOptions& options) {
    if (gamma < 1) throw Error(ErrorCode::kGammaTooSmall, "gamma must be at least the relative dimension 1");
    const MeasureChain<mpq_class> chain = exact_parry_chain(d);
    const ExactPerron perron = exact_perron(d);
    const mpz_class lam = perron.lambda.get_num();
    std::vector<mpq_class> scales;
    for (int k = 0; k <= level; ++k) {
        mpz_class p;
        mpz_pow_ui(p.get_mpz_t(), lam.get_mpz_t(), static_cast<unsigned long>(k * gamma));
        scales.emplace_back(p);
    }
    ExactSpectrumTable table;
    table.gamma = gamma;
    table.level = level;
    std::vector<ExactSpectrumEntry> raw;
    auto scale = [&](int k) { return scales.at(k); };
    auto emit = [&](int l, std::uint64_t i, const mpq_class& value, std::uint64_t mult) {
        raw.push_back({value, mult, l, i});
    };
    mpq_class threshold;
    bool has_threshold = false;
    walk_spectrum<mpq_class>(d, chain, level, options, scale, emit, threshold, has_threshold);
    table.completeness_threshold = threshold;
    std::stable_sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
    for (auto& r : raw) {
        if (!table.entries.empty() && table.entries.back().value == r.value)
            table.entries.back().multiplicity += r.multiplicity;
        else
            table.entries.push_back(std::move(r));
    }
    return table;
}

namespace {

void check_alignment(const EigenBasis& basis, const SpectrumTable& table) {
    if (table.level != basis.level() || table.block_values.size() != basis.blocks().size())
        throw Error(ErrorCode::kLevelExceedsTable, "spectrum table and eigenbasis are built at different levels");
}

}  // namespace

double dirichlet_eigen(const EigenBasis& basis, const SpectrumTable& table, const LCFunction& f,
                       const LCFunction& g) {
    if (f.level > table.level || g.level > table.level)
        throw Error(ErrorCode::kLevelExceedsTable, "function finer than the spectrum table");
    check_alignment(basis, table);
    const auto cf = basis.coefficients(f);
    const auto cg = basis.coefficients(g);
    double total = 0.0;
    for (std::size_t b = 0; b < basis.blocks().size(); ++b) {
        double s = 0.0;
        const std::size_t o = basis.block_offset(b);
        for (int l = 0; l < basis.blocks()[b].dimension(); ++l) s += cf[o + l] * cg[o + l];
        total += table.block_values[b] * s;
    }
    return total;
}

double dirichlet_bruteforce(const CellSpace& space, double gamma, const LCFunction& f, const LCFunction& g,
                            std::size_t pair_cap) {
    const int level = std::max(f.level, g.level);
    const LCFunction x = lift(space, f, level);
    const LCFunction y = lift(space, g, level);
    const std::size_t n = x.values.size();
    if (n > 0 && n > pair_cap / n) throw Error(ErrorCode::kCapacityExceeded, "too many cell pairs");
    const PathTree& tree = space.tree();
    const auto mass = space.masses(level);
    std::vector<double> weight(level + 1);
    for (int j = 0; j <= level; ++j) weight[j] = std::pow(space.lambda(), gamma * j);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double df = x.values[i] - x.values[j];
            const double dg = y.values[i] - y.values[j];
            if (df == 0.0 || dg == 0.0) continue;
            total += df * dg * mass[i] * mass[j] * weight[tree.common_prefix_length(level, i, j)];
        }
    return total;
}

std::uint64_t counting_function(const SpectrumTable& table, double big_lambda) {
    if (!(big_lambda < table.completeness_threshold))
        throw Error(ErrorCode::kTableIncomplete, "Lambda = " + std::to_string(big_lambda) +
                                                     " is not below the completeness threshold " +
                                                     std::to_string(table.completeness_threshold));
    std::uint64_t count = 0;
    for (const auto& e : table.entries) {
        if (e.value > big_lambda * (1.0 + 1e-12)) break;
        count += e.multiplicity;
    }
    return count;
}

WeylFit weyl_fit(const SpectrumTable& table, double d_psi, double lo, double hi) {
    if (!(table.gamma > d_psi + kGammaSlack))
        throw Error(ErrorCode::kGammaTooSmall, "Weyl exponent needs gamma above the relative dimension");
    hi = std::min(hi, table.completeness_threshold);
    WeylFit fit;
    fit.expected_slope = 1.0 / (table.gamma - d_psi);
    fit.window_lo = lo;
    fit.window_hi = hi;
    fit.band_min = std::numeric_limits<double>::infinity();
    std::vector<double> xs, ys;
    std::vector<int> levels;
    std::uint64_t count = 0;
    for (const auto& e : table.entries) {
        count += e.multiplicity;
        if (e.value < lo || e.value >= hi) continue;
        xs.push_back(std::log(e.value));
        ys.push_back(std::log(static_cast<double>(count)));
        levels.push_back(e.level);
        const double band = static_cast<double>(count) * std::pow(e.value, -fit.expected_slope);
        fit.band_min = std::min(fit.band_min, band);
        fit.band_max = std::max(fit.band_max, band);
    }
    std::sort(levels.begin(), levels.end());
    fit.levels = static_cast<int>(std::unique(levels.begin(), levels.end()) - levels.begin());
    fit.points = static_cast<int>(xs.size());
    if (fit.levels < 5 || fit.points < 2)
        throw Error(ErrorCode::kInsufficientRange, "only " + std::to_string(fit.levels) +
                                                       " levels fall inside the fitting window");
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (!(sxx > 0)) throw Error(ErrorCode::kInsufficientRange, "degenerate fitting window");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

WeylFit weyl_fit(const SpectrumTable& table, double d_psi) {
    const double thr = table.completeness_threshold;
    if (!std::isfinite(thr)) throw Error(ErrorCode::kInsufficientRange, "table has no completeness threshold");
    return weyl_fit(table, d_psi, std::sqrt(thr), thr);
}

namespace {

// Bound on the discarded generators below level K for a point of the level-K
// cell x: each contributes at most exp(-t mu lambda^{k gamma}) / mu_child.
double heat_tail(const EigenBasis& basis, std::size_t x, double t, double gamma) {
    const CellSpace& space = basis.space();
    const int level = basis.level();
    double c1 = 1.0;
    for (const auto& row : space.gibbs().chain().ratio)
        for (double r : row) c1 = std::min(c1, r);
    const double lam = space.lambda();
    const double rho = c1 * std::pow(lam, gamma);
    if (!(rho > 1.0)) return std::numeric_limits<double>::infinity();
    const double mu = space.masses(level)[x];
    double total = 0.0;
    for (int j = 0; j < 100000; ++j) {
        const int k = level + j;
        const double rate = t * mu * std::pow(c1, j) * std::pow(lam, k * gamma);
        const double log_term = -rate - std::log(mu) - (j + 1) * std::log(c1);
        if (log_term > 700) return std::numeric_limits<double>::infinity();
        const double term = std::exp(log_term);
        total += term;
        if (rate > 50 && term < 1e-18 * std::max(total, 1e-300)) return total;
        if (term < 1e-300 && rate > 700) return total;
    }
    return std::numeric_limits<double>::infinity();
}

}  // namespace

HeatValue heat_kernel(const EigenBasis& basis, const SpectrumTable& table, std::size_t x, std::size_t y, double t,
                      double tolerance) {
    check_alignment(basis, table);
    if (!(t > 0)) throw Error(ErrorCode::kInvalidArgument, "t must be positive");
    const PathTree& tree = basis.space().tree();
    const int level = basis.level();
    if (x >= tree.size(level) || y >= tree.size(level)) throw Error(ErrorCode::kInvalidPath, "cell out of range");

    HeatValue out;
    out.value = 1.0;
    auto add_block = [&](long b, std::size_t cx, std::size_t cy) {
        if (b < 0) return;
        const auto& block = basis.blocks()[b];
        double s = 0.0;
        for (int l = 0; l < block.dimension(); ++l)
            s += block.vectors(cx - block.child_begin, l) * block.vectors(cy - block.child_begin, l);
        out.value += std::exp(-t * table.block_values[b]) * s;
    };
    add_block(basis.block_at(-1, 0), tree.source(level, x), tree.source(level, y));
    if (tree.source(level, x) == tree.source(level, y)) {
        const int j = x == y ? level - 1 : tree.common_prefix_length(level, x, y);
        for (int k = 0; k <= j && k < level; ++k) {
            const std::size_t node = tree.ancestor(level, x, k);
            add_block(basis.block_at(k, node), tree.ancestor(level, x, k + 1), tree.ancestor(level, y, k + 1));
        }
    }
    out.tail_bound = x == y ? heat_tail(basis, x, t, table.gamma) : 0.0;
    if (out.tail_bound > tolerance)
        throw Error(ErrorCode::kTruncationError, "heat-kernel tail bound " + std::to_string(out.tail_bound) +
                                                     " exceeds the tolerance");
    return out;
}

HeatValue heat_kernel(const EigenBasis& basis, const SpectrumTable& table, const PathId& x, const PathId& y, double t,
                      double tolerance) {
    if (x.length() != basis.level() || y.length() != basis.level())
        throw Error(ErrorCode::kLengthMismatch, "heat-kernel arguments must be level-K paths");
    const PathTree& tree = basis.space().tree();
    return heat_kernel(basis, table, tree.index_of(x), tree.index_of(y), t, tolerance);
}

double heat_profile(double t, double distance, double gamma, double d_psi) {
    const double a = gamma - d_psi;
    return std::pow(t, -d_psi / a) * std::pow(1.0 + distance / std::pow(t, 1.0 / a), -gamma);
}

HeatEstimate heat_estimate_check(const EigenBasis& basis, const SpectrumTable& table, double d_psi,
                                 std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                 std::span<const double> times) {
    if (!(table.gamma > d_psi + kGammaSlack))
        throw Error(ErrorCode::kGammaTooSmall, "heat profile needs gamma above the relative dimension");
    const PathTree& tree = basis.space().tree();
    const int level = basis.level();
    HeatEstimate out;
    out.c1 = std::numeric_limits<double>::infinity();
    for (const auto& [x, y] : pairs) {
        const double dist = x == y ? 0.0
                            : tree.source(level, x) != tree.source(level, y)
                                ? 1.0
                                : std::pow(basis.space().lambda(), -tree.common_prefix_length(level, x, y));
        for (double t : times) {
            const double r = heat_kernel(basis, table, x, y, t).value / heat_profile(t, dist, table.gamma, d_psi);
            out.c1 = std::min(out.c1, r);
            out.c2 = std::max(out.c2, r);
            ++out.samples;
        }
    }
    out.ratio = out.c2 / out.c1;
    return out;
}

PoincareResult poincare_check(const EigenBasis& basis, const SpectrumTable& table, const LCFunction& f) {
    const CellSpace& space = basis.space();
    PoincareResult out;
    out.energy = dirichlet_eigen(basis, table, f, f);
    const double mean = integrate(space, f);
    out.variance = l2_norm_sq(space, combine(space, 1.0, f, -mean, constant(space, 1.0, 0)));
    out.pass = out.energy >= out.variance - 1e-12;
    return out;
}

double l2w_ratio(const EigenBasis& basis, const SpectrumTable& table, const LCFunction& f) {
    const CellSpace& space = basis.space();
    const auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
    if (f.values.empty() || *hi - *lo <= 1e-14 * std::max(1.0, std::abs(*hi)))
        throw Error(ErrorCode::kDivisionByZero, "constant function has zero energy");
    const double d_psi = space.gibbs().relative_dimension();
    double num = 0.0;
    for (int k = 1; k <= f.level; ++k)
        num += std::pow(space.lambda(), (table.gamma - d_psi) * k) * l2_norm_sq(space, delta(space, f, k));
    return num / dirichlet_eigen(basis, table, f, f);
}

double cylinder_pair_sum(std::span<const double> w, std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t j = i + 1; j < w.size(); ++j) s += w[i] * w[j] * (a[i] - a[j]) * (b[i] - b[j]);
    return s;
}

double cylinder_mid_step(std::span<const double> w, std::span<const double> a, std::span<const double> b) {
    double mass = 0.0, sab = 0.0, sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        mass += w[i];
        sab += w[i] * a[i] * b[i];
        sa += w[i] * a[i];
        sb += w[i] * b[i];
    }
    return mass * sab - sa * sb;
}

double cylinder_centered(std::span<const double> w, std::span<const double> a, std::span<const double> b) {
    double mass = 0.0, sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        mass += w[i];
        sa += w[i] * a[i];
        sb += w[i] * b[i];
    }
    const double ae = sa / mass;
    const double be = sb / mass;
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * (a[i] - ae) * (b[i] - be);
    return mass * s;
}

double cross_cylinder_energy(const CellSpace& space, double gamma, const LCFunction& f, int k, std::size_t node,
                             int child_a, int child_b) {
    check_function(space, f);
    if (k + 1 > f.level) throw Error(ErrorCode::kInvalidArgument, "function coarser than the child cylinders");
    const PathTree& tree = space.tree();
    const std::size_t c0 = tree.child_begin(k, node);
    const std::size_t nc = tree.child_end(k, node) - c0;
    if (child_a < 0 || child_b < 0 || static_cast<std::size_t>(child_a) >= nc ||
        static_cast<std::size_t>(child_b) >= nc || child_a == child_b)
        throw Error(ErrorCode::kInvalidArgument, "need two distinct children");
    auto descendants = [&](std::size_t c) {
        std::size_t begin = c, end = c + 1;
        for (int l = k + 1; l < f.level; ++l) {
            begin = tree.child_begin(l, begin);
            end = tree.child_begin(l, end);
        }
        return std::pair{begin, end};
    };
    const auto [a0, a1] = descendants(c0 + child_a);
    const auto [b0, b1] = descendants(c0 + child_b);
    const auto mass = space.masses(f.level);
    double s = 0.0;
    for (std::size_t x = a0; x < a1; ++x)
        for (std::size_t y = b0; y < b1; ++y) {
            const double df = f.values[x] - f.values[y];
            s += df * df * mass[x] * mass[y];
        }
    return std::pow(space.lambda(), gamma * k) * s;
}

}  // namespace cantorlap
