#pragma once

#include "cantorlap/error.hpp"
#include "cantorlap/linalg.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cantorlap {

inline constexpr std::size_t kDefaultPathCap = 10'000'000;

/// Smallest m with A^m > 0 entrywise, searched up to the Wielandt bound.
int validate_primitive(const IntMatrix& a);

/// Exact rank of A^N; equals the number of nonzero eigenvalues with
/// algebraic multiplicity.
int eventual_rank(const IntMatrix& a);

struct PerronData {
    double lambda = 0.0;
    Eigen::VectorXd right_pf;  // A right = lambda right
    Eigen::VectorXd left_pf;   // A^T left = lambda left, sum(left) = 1, left.right = 1
    std::vector<std::complex<double>> all_eigenvalues;  // sorted by modulus, descending
    double lambda_minus = 0.0;
    bool has_subdominant = false;  // false when lambda is the only nonzero modulus
};

PerronData perron_data(const IntMatrix& a);

struct Edge {
    int source = 0;
    int range = 0;
};

/// Stationary Bratteli diagram. A(i, j) counts edges from vertex j on one
/// level to vertex i on the next. Edge ids run row-major over (i, j), then
/// through the multiplicity, which fixes the lexicographic path order.
class Diagram {
public:
    explicit Diagram(IntMatrix a);

    const IntMatrix& matrix() const { return a_; }
    int vertex_count() const { return static_cast<int>(a_.rows()); }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    int primitivity_exponent() const { return primitivity_; }
    int eventual_rank() const { return eventual_rank_; }

    const Edge& edge(int id) const { return edges_.at(id); }
    std::span<const int> out_edges(int v) const;
    std::span<const int> edges_between(int source, int range) const;
    int out_degree(int v) const { return static_cast<int>(out_edges(v).size()); }

    const PerronData& perron() const { return perron_; }
    double lambda() const { return perron_.lambda; }

    /// |P_k|, saturating at UINT64_MAX.
    std::uint64_t path_count(int k) const;

private:
    IntMatrix a_;
    int primitivity_ = 0;
    int eventual_rank_ = 0;
    std::vector<Edge> edges_;
    std::vector<int> out_sorted_;       // edge ids grouped by source
    std::vector<std::size_t> out_begin_;  // size N + 1
    std::vector<std::size_t> between_begin_;  // per (source, range), size N*N + 1
    std::vector<int> between_sorted_;
    PerronData perron_;
};

/// A finite path: a vertex of V_0 followed by k composable edges.
struct PathId {
    int source = 0;
    std::vector<int> edges;

    int length() const { return static_cast<int>(edges.size()); }
    auto operator<=>(const PathId&) const = default;
    bool operator==(const PathId&) const = default;

    /// "v:e1,e2,..." ("v:" for length 0).
    std::string to_string() const;
    static PathId parse(std::string_view text);
};

void check_path(const Diagram& d, const PathId& e);  // throws InvalidPath
int range_of(const Diagram& d, const PathId& e);
PathId extend(const Diagram& d, const PathId& e, int edge);
/// e e': requires tail.source == r(e).
PathId concat(const Diagram& d, const PathId& e, const PathId& tail);
PathId prefix(const PathId& e, int k);

std::vector<PathId> enumerate_paths(const Diagram& d, int k, std::size_t cap = kDefaultPathCap);

/// Position of e in the lexicographic order of P_k and the inverse.
std::uint64_t path_index(const Diagram& d, const PathId& e);
PathId path_at(const Diagram& d, int k, std::uint64_t index);

int common_prefix_length(const PathId& a, const PathId& b);
/// lambda^-j for distinct cells with common prefix length j, 0 if equal.
double cell_distance(const Diagram& d, const PathId& a, const PathId& b);

/// Number of forced (out-degree 1) steps after vertex v before a branch.
int forced_steps(const Diagram& d, int v);
double cylinder_diameter(const Diagram& d, const PathId& e);

/// All paths of levels 0..depth stored level by level in lexicographic order.
/// Children of a node are contiguous and appear in out-edge order.
class PathTree {
public:
    PathTree(const Diagram& d, int depth, std::size_t cap = kDefaultPathCap);

    int depth() const { return static_cast<int>(levels_.size()) - 1; }
    std::size_t size(int level) const { return levels_.at(level).range.size(); }

    int range(int level, std::size_t i) const { return levels_[level].range[i]; }
    int source(int level, std::size_t i) const;
    int last_edge(int level, std::size_t i) const;  // -1 at level 0
    std::size_t parent(int level, std::size_t i) const { return levels_[level].parent[i]; }
    std::size_t child_begin(int level, std::size_t i) const { return levels_[level].child_begin[i]; }
    std::size_t child_end(int level, std::size_t i) const { return levels_[level].child_begin[i + 1]; }
    std::size_t ancestor(int level, std::size_t i, int target) const;

    PathId path(int level, std::size_t i) const;
    std::size_t index_of(const PathId& e) const;
    int common_prefix_length(int level, std::size_t i, std::size_t j) const;

private:
    struct Level {
        std::vector<std::int32_t> range;
        std::vector<std::int32_t> edge;
        std::vector<std::uint32_t> parent;
        std::vector<std::uint32_t> child_begin;  // size()+1 entries, empty on the last level
    };
    std::vector<Level> levels_;
};

}  // namespace cantorlap
