#include "cantorlap/bratteli.hpp"

#include "cantorlap/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace cantorlap {

namespace {

void check_entries(const IntMatrix& a) {
    if (a.rows() == 0 || a.rows() != a.cols())
        throw Error(ErrorCode::kInvalidArgument, "matrix must be square and non-empty");
    if ((a.array() < 0).any()) throw Error(ErrorCode::kInvalidArgument, "matrix has negative entries");
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        if (a.row(i).sum() == 0) throw Error(ErrorCode::kZeroLine, "row " + std::to_string(i) + " is zero");
        if (a.col(i).sum() == 0) throw Error(ErrorCode::kZeroLine, "column " + std::to_string(i) + " is zero");
    }
}

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
    const std::uint64_t s = a + b;
    return s < a ? std::numeric_limits<std::uint64_t>::max() : s;
}

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a)
        return std::numeric_limits<std::uint64_t>::max();
    return a * b;
}

// counts[d][v] = number of paths of length d starting at v.
std::vector<std::vector<std::uint64_t>> paths_from(const IntMatrix& a, int depth) {
    const auto n = a.rows();
    std::vector<std::vector<std::uint64_t>> counts(depth + 1, std::vector<std::uint64_t>(n, 1));
    for (int d = 1; d <= depth; ++d)
        for (Eigen::Index j = 0; j < n; ++j) {
            std::uint64_t c = 0;
            for (Eigen::Index i = 0; i < n; ++i)
                c = saturating_add(c, saturating_mul(static_cast<std::uint64_t>(a(i, j)), counts[d - 1][i]));
            counts[d][j] = c;
        }
    return counts;
}

}  // namespace

int validate_primitive(const IntMatrix& a) {
    check_entries(a);
    const auto n = a.rows();
    using Pattern = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;
    const Pattern base = (a.array() > 0).cast<int>();
    Pattern p = base;
    const long long bound = (n - 1) * (n - 1) + 1;
    for (long long m = 1; m <= bound; ++m) {
        if ((p.array() > 0).all()) return static_cast<int>(m);
        p = ((p * base).array() > 0).cast<int>();
    }
    throw Error(ErrorCode::kNotPrimitive, "no positive power within the Wielandt bound");
}

int eventual_rank(const IntMatrix& a) {
    return static_cast<int>(rank(power(to_rational(a), static_cast<int>(a.rows()))));
}

PerronData perron_data(const IntMatrix& a) {
    validate_primitive(a);
    const Eigen::MatrixXd m = a.cast<double>();
    PerronPair pair = perron_pair(m);
    if (pair.value <= 1.0 + 1e-12)
        throw Error(ErrorCode::kInvalidArgument, "Perron root must exceed 1 (path space is a single point)");

    PerronData out;
    out.lambda = pair.value;
    out.left_pf = pair.left / pair.left.sum();
    out.right_pf = pair.right / out.left_pf.dot(pair.right);

    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
        out.all_eigenvalues.push_back(solver.eigenvalues()[i]);
    std::stable_sort(out.all_eigenvalues.begin(), out.all_eigenvalues.end(),
                     [](auto x, auto y) { return std::abs(x) > std::abs(y); });

    // Tiny eigenvalues of nilpotent parts are numerically noisy, so the count
    // of nonzero ones comes from the exact rank.
    const int d = eventual_rank(a);
    out.lambda_minus = std::abs(out.all_eigenvalues[d - 1]);
    out.has_subdominant = d > 1;
    if (!out.has_subdominant) out.lambda_minus = out.lambda;
    return out;
}

Diagram::Diagram(IntMatrix a) : a_(std::move(a)) {
    primitivity_ = validate_primitive(a_);
    eventual_rank_ = cantorlap::eventual_rank(a_);
    const int n = vertex_count();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (long long c = 0; c < a_(i, j); ++c) edges_.push_back({j, i});

    out_begin_.assign(n + 1, 0);
    between_begin_.assign(static_cast<std::size_t>(n) * n + 1, 0);
    for (const auto& e : edges_) {
        ++out_begin_[e.source + 1];
        ++between_begin_[static_cast<std::size_t>(e.source) * n + e.range + 1];
    }
    for (int v = 0; v < n; ++v) out_begin_[v + 1] += out_begin_[v];
    for (std::size_t k = 0; k + 1 < between_begin_.size(); ++k) between_begin_[k + 1] += between_begin_[k];
    out_sorted_.resize(edges_.size());
    between_sorted_.resize(edges_.size());
    std::vector<std::size_t> fill_out(out_begin_.begin(), out_begin_.end() - 1);
    std::vector<std::size_t> fill_between(between_begin_.begin(), between_begin_.end() - 1);
    for (int id = 0; id < edge_count(); ++id) {
        const auto& e = edges_[id];
        out_sorted_[fill_out[e.source]++] = id;
        between_sorted_[fill_between[static_cast<std::size_t>(e.source) * n + e.range]++] = id;
    }
    perron_ = perron_data(a_);
}

std::span<const int> Diagram::out_edges(int v) const {
    if (v < 0 || v >= vertex_count()) throw Error(ErrorCode::kInvalidArgument, "vertex out of range");
    return {out_sorted_.data() + out_begin_[v], out_begin_[v + 1] - out_begin_[v]};
}

std::span<const int> Diagram::edges_between(int source, int range) const {
    const int n = vertex_count();
    if (source < 0 || source >= n || range < 0 || range >= n)
        throw Error(ErrorCode::kInvalidArgument, "vertex out of range");
    const std::size_t k = static_cast<std::size_t>(source) * n + range;
    return {between_sorted_.data() + between_begin_[k], between_begin_[k + 1] - between_begin_[k]};
}

std::uint64_t Diagram::path_count(int k) const {
    if (k < 0) throw Error(ErrorCode::kInvalidArgument, "negative level");
    const auto counts = paths_from(a_, k);
    std::uint64_t total = 0;
    for (auto c : counts[k]) total = saturating_add(total, c);
    return total;
}

std::string PathId::to_string() const {
    std::string out = std::to_string(source) + ":";
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(edges[i]);
    }
    return out;
}

PathId PathId::parse(std::string_view text) {
    auto bad = [&] { return Error(ErrorCode::kInvalidPath, "cannot parse path '" + std::string(text) + "'"); };
    auto read_int = [&](std::string_view s) {
        int value = 0;
        while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
        while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || value < 0) throw bad();
        return value;
    };
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw bad();
    PathId p;
    p.source = read_int(text.substr(0, colon));
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        p.edges.push_back(read_int(rest.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
        if (rest.empty()) throw bad();
    }
    return p;
}

void check_path(const Diagram& d, const PathId& e) {
    if (e.source < 0 || e.source >= d.vertex_count())
        throw Error(ErrorCode::kInvalidPath, "source vertex out of range in " + e.to_string());
    int v = e.source;
    for (int id : e.edges) {
        if (id < 0 || id >= d.edge_count() || d.edge(id).source != v)
            throw Error(ErrorCode::kInvalidPath, "edges do not compose in " + e.to_string());
        v = d.edge(id).range;
    }
}

int range_of(const Diagram& d, const PathId& e) {
    check_path(d, e);
    return e.edges.empty() ? e.source : d.edge(e.edges.back()).range;
}

PathId extend(const Diagram& d, const PathId& e, int edge) {
    PathId out = e;
    out.edges.push_back(edge);
    check_path(d, out);
    return out;
}

PathId concat(const Diagram& d, const PathId& e, const PathId& tail) {
    if (tail.source != range_of(d, e))
        throw Error(ErrorCode::kInvalidPath, "tail does not start at the range of " + e.to_string());
    PathId out = e;
    out.edges.insert(out.edges.end(), tail.edges.begin(), tail.edges.end());
    check_path(d, out);
    return out;
}

PathId prefix(const PathId& e, int k) {
    if (k < 0 || k > e.length()) throw Error(ErrorCode::kInvalidArgument, "prefix length out of range");
    return {e.source, std::vector<int>(e.edges.begin(), e.edges.begin() + k)};
}

std::vector<PathId> enumerate_paths(const Diagram& d, int k, std::size_t cap) {
    if (k < 0) throw Error(ErrorCode::kInvalidArgument, "negative level");
    if (d.path_count(k) > cap)
        throw Error(ErrorCode::kCapacityExceeded, "|P_" + std::to_string(k) + "| exceeds the path cap");
    std::vector<PathId> level;
    for (int v = 0; v < d.vertex_count(); ++v) level.push_back({v, {}});
    for (int step = 0; step < k; ++step) {
        std::vector<PathId> next;
        for (const auto& p : level) {
            const int r = p.edges.empty() ? p.source : d.edge(p.edges.back()).range;
            for (int id : d.out_edges(r)) {
                PathId c = p;
                c.edges.push_back(id);
                next.push_back(std::move(c));
            }
        }
        level = std::move(next);
    }
    return level;
}

std::uint64_t path_index(const Diagram& d, const PathId& e) {
    check_path(d, e);
    const int k = e.length();
    const auto counts = paths_from(d.matrix(), k);
    std::uint64_t index = 0;
    for (int v = 0; v < e.source; ++v) index += counts[k][v];
    int cur = e.source;
    for (int step = 0; step < k; ++step) {
        for (int id : d.out_edges(cur)) {
            if (id == e.edges[step]) break;
            index += counts[k - step - 1][d.edge(id).range];
        }
        cur = d.edge(e.edges[step]).range;
    }
    return index;
}

PathId path_at(const Diagram& d, int k, std::uint64_t index) {
    if (k < 0) throw Error(ErrorCode::kInvalidArgument, "negative level");
    const auto counts = paths_from(d.matrix(), k);
    PathId p;
    p.source = -1;
    for (int v = 0; v < d.vertex_count(); ++v) {
        if (index < counts[k][v]) {
            p.source = v;
            break;
        }
        index -= counts[k][v];
    }
    if (p.source < 0) throw Error(ErrorCode::kInvalidArgument, "path index out of range");
    int cur = p.source;
    for (int step = 0; step < k; ++step) {
        for (int id : d.out_edges(cur)) {
            const auto c = counts[k - step - 1][d.edge(id).range];
            if (index < c) {
                p.edges.push_back(id);
                cur = d.edge(id).range;
                break;
            }
            index -= c;
        }
    }
    return p;
}

int common_prefix_length(const PathId& a, const PathId& b) {
    if (a.length() != b.length()) throw Error(ErrorCode::kLengthMismatch, "paths of different length");
    if (a.source != b.source) return 0;
    int j = 0;
    while (j < a.length() && a.edges[j] == b.edges[j]) ++j;
    return j;
}

double cell_distance(const Diagram& d, const PathId& a, const PathId& b) {
    if (a == b) return 0.0;
    return std::pow(d.lambda(), -common_prefix_length(a, b));
}

int forced_steps(const Diagram& d, int v) {
    int t = 0;
    while (d.out_degree(v) == 1) {
        if (++t > d.vertex_count())
            throw Error(ErrorCode::kDegenerateCylinder, "continuation is forced forever");
        v = d.edge(d.out_edges(v)[0]).range;
    }
    return t;
}

double cylinder_diameter(const Diagram& d, const PathId& e) {
    return std::pow(d.lambda(), -(e.length() + forced_steps(d, range_of(d, e))));
}

PathTree::PathTree(const Diagram& d, int depth, std::size_t cap) {
    if (depth < 0) throw Error(ErrorCode::kInvalidArgument, "negative depth");
    cap = std::min<std::size_t>(cap, std::numeric_limits<std::uint32_t>::max() - 1);
    if (d.path_count(depth) > cap)
        throw Error(ErrorCode::kCapacityExceeded, "|P_" + std::to_string(depth) + "| exceeds the path cap");
    levels_.resize(depth + 1);
    auto& root = levels_[0];
    for (int v = 0; v < d.vertex_count(); ++v) {
        root.range.push_back(v);
        root.edge.push_back(-1);
        root.parent.push_back(static_cast<std::uint32_t>(v));
    }
    for (int l = 0; l < depth; ++l) {
        auto& cur = levels_[l];
        auto& next = levels_[l + 1];
        cur.child_begin.reserve(cur.range.size() + 1);
        for (std::size_t i = 0; i < cur.range.size(); ++i) {
            cur.child_begin.push_back(static_cast<std::uint32_t>(next.range.size()));
            for (int id : d.out_edges(cur.range[i])) {
                next.range.push_back(d.edge(id).range);
                next.edge.push_back(id);
                next.parent.push_back(static_cast<std::uint32_t>(i));
            }
        }
        cur.child_begin.push_back(static_cast<std::uint32_t>(next.range.size()));
    }
}

std::size_t PathTree::ancestor(int level, std::size_t i, int target) const {
    if (target < 0 || target > level) throw Error(ErrorCode::kInvalidArgument, "ancestor level out of range");
    for (int l = level; l > target; --l) i = levels_[l].parent[i];
    return i;
}

int PathTree::source(int level, std::size_t i) const {
    return static_cast<int>(ancestor(level, i, 0));
}

int PathTree::last_edge(int level, std::size_t i) const { return levels_[level].edge[i]; }

PathId PathTree::path(int level, std::size_t i) const {
    PathId p;
    p.edges.resize(level);
    for (int l = level; l > 0; --l) {
        p.edges[l - 1] = levels_[l].edge[i];
        i = levels_[l].parent[i];
    }
    p.source = static_cast<int>(i);
    return p;
}

std::size_t PathTree::index_of(const PathId& e) const {
    if (e.length() > depth()) throw Error(ErrorCode::kInvalidPath, "path longer than the tree");
    if (e.source < 0 || static_cast<std::size_t>(e.source) >= size(0))
        throw Error(ErrorCode::kInvalidPath, "source out of range in " + e.to_string());
    std::size_t i = e.source;
    for (int l = 0; l < e.length(); ++l) {
        std::size_t c = child_begin(l, i);
        const std::size_t end = child_end(l, i);
        while (c < end && levels_[l + 1].edge[c] != e.edges[l]) ++c;
        if (c == end) throw Error(ErrorCode::kInvalidPath, "edges do not compose in " + e.to_string());
        i = c;
    }
    return i;
}

int PathTree::common_prefix_length(int level, std::size_t i, std::size_t j) const {
    int l = level;
    while (i != j) {
        if (l == 0) return 0;
        i = levels_[l].parent[i];
        j = levels_[l].parent[j];
        --l;
    }
    return l;
}

}  // namespace cantorlap
