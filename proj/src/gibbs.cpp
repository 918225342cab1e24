#include "cantorlap/gibbs.hpp"

#include "cantorlap/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cantorlap {

namespace {

void collect_blocks(const Diagram& d, int depth, std::vector<int>& current, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(current.size()) == depth) {
        out.push_back(current);
        return;
    }
    const int v = d.edge(current.back()).range;
    for (int id : d.out_edges(v)) {
        current.push_back(id);
        collect_blocks(d, depth, current, out);
        current.pop_back();
    }
}

// Primitive matrices have every power beyond the Wielandt bound positive,
// so one power of the pattern decides.
bool pattern_primitive(const Eigen::MatrixXd& m) {
    const auto n = m.rows();
    Eigen::MatrixXd p = (m.array() > 0).cast<double>();
    const double bound = static_cast<double>(n - 1) * static_cast<double>(n - 1) + 1.0;
    for (double e = 1.0; e < bound; e *= 2.0) p = ((p * p).array() > 0).cast<double>();
    return (p.array() > 0).all();
}

}  // namespace

GibbsData::GibbsData(const Diagram& diagram, Potential potential, StartWeighting weighting)
    : diagram_(diagram), potential_(std::move(potential)), weighting_(weighting) {
    const int m = potential_.depth;
    if (m < 1) throw Error(ErrorCode::kInvalidArgument, "potential depth must be at least 1");

    std::vector<int> current;
    for (int id = 0; id < diagram_.edge_count(); ++id) {
        current.assign(1, id);
        collect_blocks(diagram_, m, current, blocks_);
    }
    for (int b = 0; b < static_cast<int>(blocks_.size()); ++b) block_lookup_[blocks_[b]] = b;

    for (const auto& [key, value] : potential_.values) {
        if (static_cast<int>(key.size()) != m || !block_lookup_.count(key))
            throw Error(ErrorCode::kInvalidArgument, "potential entry is not an admissible block of length " +
                                                         std::to_string(m));
        if (!std::isfinite(value)) throw Error(ErrorCode::kInvalidArgument, "potential values must be finite");
    }
    psi_.resize(blocks_.size(), 0.0);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        auto it = potential_.values.find(blocks_[b]);
        if (it == potential_.values.end()) {
            missing_.push_back(blocks_[b]);
        } else {
            psi_[b] = it->second;
            if (it->second != 0.0) zero_ = false;
        }
    }

    // Block recoding: w -> w' when w' drops the first edge of w and appends one.
    const auto nb = static_cast<Eigen::Index>(blocks_.size());
    m_ = Eigen::MatrixXd::Zero(nb, nb);
    std::vector<int> shifted(m);
    for (Eigen::Index b = 0; b < nb; ++b) {
        const auto& w = blocks_[b];
        std::copy(w.begin() + 1, w.end(), shifted.begin());
        for (int id : diagram_.out_edges(diagram_.edge(w.back()).range)) {
            shifted[m - 1] = id;
            m_(b, block_lookup_.at(shifted)) = std::exp(psi_[b]);
        }
    }
    if (nb <= 2048 && !pattern_primitive(m_))
        throw Error(ErrorCode::kNonPrimitiveBlockShift, "block recoding is not primitive");

    const PerronPair pair = perron_pair(m_);
    big_lambda_ = pair.value;
    u_ = pair.left / pair.left.sum();
    v_ = pair.right / u_.dot(pair.right);
    v_sum_ = v_.sum();

    pressure_ = std::log(big_lambda_);
    integral_psi_ = 0.0;
    for (Eigen::Index b = 0; b < nb; ++b) integral_psi_ += u_[b] * v_[b] * psi_[b];
    entropy_ = pressure_ - integral_psi_;
    relative_dimension_ = entropy_ / std::log(diagram_.lambda());

    // Chain states: vertices, then proper prefixes of blocks, then blocks.
    const int n = diagram_.vertex_count();
    std::vector<double> block_mass(nb);
    for (Eigen::Index b = 0; b < nb; ++b) block_mass[b] = start_weight(static_cast<int>(b)) * v_[b];

    std::map<std::vector<int>, int> state_of;
    std::vector<double> mass(n, 0.0);
    chain_.vertex.resize(n);
    for (int v = 0; v < n; ++v) chain_.vertex[v] = v;
    for (int len = 1; len < m; ++len)
        for (Eigen::Index b = 0; b < nb; ++b) {
            std::vector<int> p(blocks_[b].begin(), blocks_[b].begin() + len);
            auto [it, inserted] = state_of.emplace(p, static_cast<int>(mass.size()));
            if (inserted) {
                mass.push_back(0.0);
                chain_.vertex.push_back(diagram_.edge(p.back()).range);
            }
            mass[it->second] += block_mass[b];
        }
    const int first_block_state = static_cast<int>(mass.size());
    for (Eigen::Index b = 0; b < nb; ++b) {
        mass.push_back(block_mass[b]);
        chain_.vertex.push_back(diagram_.edge(blocks_[b].back()).range);
        mass[diagram_.edge(blocks_[b].front()).source] += block_mass[b];
    }
    auto state_for = [&](const std::vector<int>& p) {
        return static_cast<int>(p.size()) == m ? first_block_state + block_lookup_.at(p) : state_of.at(p);
    };

    const std::size_t states = mass.size();
    chain_.next.resize(states);
    chain_.ratio.resize(states);
    chain_.root_mass.assign(mass.begin(), mass.begin() + n);
    std::vector<std::vector<int>> label(states);
    for (const auto& [p, s] : state_of) label[s] = p;
    for (Eigen::Index b = 0; b < nb; ++b) label[first_block_state + b] = blocks_[b];
    for (std::size_t s = 0; s < states; ++s) {
        for (int id : diagram_.out_edges(chain_.vertex[s])) {
            if (static_cast<int>(s) >= first_block_state) {
                const int b = static_cast<int>(s) - first_block_state;
                std::copy(blocks_[b].begin() + 1, blocks_[b].end(), shifted.begin());
                shifted[m - 1] = id;
                const int b2 = block_lookup_.at(shifted);
                chain_.next[s].push_back(first_block_state + b2);
                chain_.ratio[s].push_back(m_(b, b2) * v_[b2] / (big_lambda_ * v_[b]));
            } else {
                std::vector<int> p = label[s];
                p.push_back(id);
                const int t = state_for(p);
                chain_.next[s].push_back(t);
                chain_.ratio[s].push_back(mass[t] / mass[s]);
            }
        }
        // The exact ratios sum to 1; renormalizing keeps the eigenvector residual
        // from compounding over many levels.
        double total = 0.0;
        for (double r : chain_.ratio[s]) total += r;
        for (double& r : chain_.ratio[s]) r /= total;
    }
    double root_total = 0.0;
    for (double r : chain_.root_mass) root_total += r;
    for (double& r : chain_.root_mass) r /= root_total;
}

double GibbsData::start_weight(int block) const {
    return weighting_ == StartWeighting::kInvariant ? u_[block] : 1.0 / v_sum_;
}

int GibbsData::block_index(std::span<const int> edges) const {
    auto it = block_lookup_.find(std::vector<int>(edges.begin(), edges.end()));
    return it == block_lookup_.end() ? -1 : it->second;
}

double GibbsData::psi(std::span<const int> edges) const {
    const int b = block_index(edges);
    if (b < 0) throw Error(ErrorCode::kInvalidArgument, "not an admissible block");
    return psi_[b];
}

double GibbsData::block_formula_mass(const PathId& e) const {
    const int m = depth();
    const int k = e.length();
    if (k < m) throw Error(ErrorCode::kInvalidArgument, "path shorter than the potential depth");
    std::span<const int> edges(e.edges);
    int b = block_index(edges.subspan(0, m));
    double value = start_weight(b);
    for (int i = 1; i + m <= k; ++i) {
        const int b2 = block_index(edges.subspan(i, m));
        value *= m_(b, b2) / big_lambda_;
        b = b2;
    }
    return value * v_[b];
}

GibbsData build_gibbs(const Diagram& d, const Potential& psi, StartWeighting weighting) {
    return GibbsData(d, psi, weighting);
}

double cylinder_measure(const GibbsData& g, const PathId& e) {
    const Diagram& d = g.diagram();
    check_path(d, e);
    if (e.length() >= g.depth()) return g.block_formula_mass(e);
    double total = 0.0;
    const auto& blocks = g.blocks();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (d.edge(blocks[b].front()).source != e.source) continue;
        if (!std::equal(e.edges.begin(), e.edges.end(), blocks[b].begin())) continue;
        PathId full{e.source, blocks[b]};
        total += g.block_formula_mass(full);
    }
    return total;
}

std::vector<std::vector<double>> tree_masses(const GibbsData& g, const PathTree& tree) {
    const auto& chain = g.chain();
    std::vector<std::vector<double>> masses(tree.depth() + 1);
    std::vector<int> state(tree.size(0));
    masses[0].resize(tree.size(0));
    for (std::size_t v = 0; v < tree.size(0); ++v) {
        state[v] = static_cast<int>(v);
        masses[0][v] = chain.root_mass[v];
    }
    for (int l = 0; l < tree.depth(); ++l) {
        std::vector<int> next_state(tree.size(l + 1));
        masses[l + 1].resize(tree.size(l + 1));
        for (std::size_t i = 0; i < tree.size(l); ++i) {
            const int s = state[i];
            const std::size_t c0 = tree.child_begin(l, i);
            for (std::size_t c = c0; c < tree.child_end(l, i); ++c) {
                const std::size_t slot = c - c0;
                next_state[c] = chain.next[s][slot];
                masses[l + 1][c] = masses[l][i] * chain.ratio[s][slot];
            }
        }
        state = std::move(next_state);
    }
    return masses;
}

Bounds gibbs_property_ratio(const GibbsData& g, int n, std::size_t cap) {
    const int m = g.depth();
    if (n < m) throw Error(ErrorCode::kInvalidArgument, "level must be at least the potential depth");
    const Diagram& d = g.diagram();
    const PathTree tree(d, n, cap);
    const auto masses = tree_masses(g, tree);
    Bounds out{std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t i = 0; i < tree.size(n); ++i) {
        std::vector<int> edges = tree.path(n, i).edges;
        // Extend by first out-edges so every Birkhoff term sees a full block.
        while (static_cast<int>(edges.size()) < n + m - 1)
            edges.push_back(d.out_edges(d.edge(edges.back()).range)[0]);
        double birkhoff = 0.0;
        for (int j = 0; j < n; ++j) birkhoff += g.psi(std::span<const int>(edges).subspan(j, m));
        const double ratio = masses[n][i] * std::exp(-birkhoff + n * g.pressure());
        out.min = std::min(out.min, ratio);
        out.max = std::max(out.max, ratio);
    }
    return out;
}

Bounds child_ratio_bounds(const GibbsData& g, int k_max, std::size_t cap) {
    if (k_max < 1) throw Error(ErrorCode::kInvalidArgument, "K must be at least 1");
    const PathTree tree(g.diagram(), k_max, cap);
    const auto masses = tree_masses(g, tree);
    Bounds out{std::numeric_limits<double>::infinity(), 0.0};
    for (int l = 0; l < k_max; ++l)
        for (std::size_t i = 0; i < tree.size(l); ++i)
            for (std::size_t c = tree.child_begin(l, i); c < tree.child_end(l, i); ++c) {
                const double r = masses[l + 1][c] / masses[l][i];
                out.min = std::min(out.min, r);
                out.max = std::max(out.max, r);
            }
    return out;
}

double integrate(const GibbsData& g, const LCFunction& f, std::size_t cap) {
    const PathTree tree(g.diagram(), f.level, cap);
    if (f.values.size() != tree.size(f.level))
        throw Error(ErrorCode::kInvalidArgument, "function size does not match its level");
    const auto masses = tree_masses(g, tree);
    double total = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) total += f.values[i] * masses[f.level][i];
    return total;
}

DistortionProfile distortion_profile(const GibbsData& g, int k_max, std::size_t cap) {
    if (k_max < 1) throw Error(ErrorCode::kInvalidArgument, "K must be at least 1");
    const PathTree tree(g.diagram(), k_max, cap);
    DistortionProfile out;
    out.values = tree_masses(g, tree);
    out.bounds = {std::numeric_limits<double>::infinity(), 0.0};
    const double lam = g.diagram().lambda();
    for (int k = 0; k <= k_max; ++k) {
        const double scale = std::pow(lam, k * g.relative_dimension());
        for (double& x : out.values[k]) {
            x *= scale;
            out.bounds.min = std::min(out.bounds.min, x);
            out.bounds.max = std::max(out.bounds.max, x);
        }
    }
    return out;
}

double shannon_entropy_rate(const GibbsData& g, int n, std::size_t cap) {
    if (n < 1) throw Error(ErrorCode::kInvalidArgument, "n must be positive");
    const PathTree tree(g.diagram(), n, cap);
    const auto masses = tree_masses(g, tree);
    double sum = 0.0;
    for (double x : masses[n])
        if (x > 0) sum -= x * std::log(x);
    return sum / n;
}

ExactPerron exact_perron(const Diagram& d) {
    const double lam = d.lambda();
    const double rounded = std::round(lam);
    if (std::abs(lam - rounded) > 1e-9 * lam)
        throw Error(ErrorCode::kNotRational, "Perron root is not an integer");
    const long root = static_cast<long>(rounded);
    RationalMatrix a = to_rational(d.matrix());
    RationalMatrix shifted = a;
    for (std::size_t i = 0; i < a.size(); ++i) shifted[i][i] -= root;
    auto right = kernel(shifted);
    auto left = kernel(transpose(shifted));
    if (right.size() != 1 || left.size() != 1)
        throw Error(ErrorCode::kNotRational, "Perron eigenspace is not one-dimensional over Q");

    ExactPerron out;
    out.lambda = root;
    out.left = left[0];
    out.right = right[0];
    mpq_class sum = 0;
    for (const auto& x : out.left) sum += x;
    for (auto& x : out.left) x /= sum;
    mpq_class dot = 0;
    for (std::size_t i = 0; i < out.left.size(); ++i) dot += out.left[i] * out.right[i];
    for (auto& x : out.right) x /= dot;
    return out;
}

MeasureChain<mpq_class> exact_parry_chain(const Diagram& d) {
    const ExactPerron p = exact_perron(d);
    const int n = d.vertex_count();
    MeasureChain<mpq_class> chain;
    chain.vertex.resize(n);
    chain.next.resize(n);
    chain.ratio.resize(n);
    chain.root_mass.resize(n);
    // mu(C_e) = right[s] left[r] lambda^-k, so the ratio only sees vertices.
    for (int v = 0; v < n; ++v) {
        chain.vertex[v] = v;
        chain.root_mass[v] = p.right[v] * p.left[v];
        for (int id : d.out_edges(v)) {
            const int r = d.edge(id).range;
            chain.next[v].push_back(r);
            chain.ratio[v].push_back(p.left[r] / (p.lambda * p.left[v]));
        }
    }
    return chain;
}

}  // namespace cantorlap
