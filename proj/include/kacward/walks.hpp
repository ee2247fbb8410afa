#ifndef KACWARD_WALKS_HPP
#define KACWARD_WALKS_HPP

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "kacward/geometry.hpp"
#include "kacward/operator.hpp"

namespace kacward {

/// Non-backtracking walk (e_0, ..., e_n) of directed edges.
struct Walk
{
    std::vector<int> edges;
    std::complex<double> weight{1.0, 0.0};
    double winding = 0.0;

    int length() const { return static_cast<int>(edges.size()) - 1; }
    bool closed() const { return length() > 0 && edges.front() == edges.back(); }
};

bool is_walk(const PlanarGraph& graph, std::span<const int> edges);

/// Goes through every undirected edge at most once (positions 0..n-1).
bool is_path(std::span<const int> edges);

/// Total turning angle; the last edge contributes its incoming turn.
double winding(const PlanarGraph& graph, std::span<const int> edges);

/// exp(i alpha / 2) times the weights of all edges but the last.
std::complex<double> walk_weight(const PlanarGraph& graph, const Eigen::VectorXd& x, std::span<const int> edges);

Walk make_walk(const PlanarGraph& graph, const Eigen::VectorXd& x, std::vector<int> edges);

/// (-e_n, ..., -e_0).
Walk reversed_walk(const PlanarGraph& graph, const Eigen::VectorXd& x, const Walk& walk);

inline constexpr std::size_t kDefaultWalkCap = 5'000'000;

/**
 * Depth-first traversal of all walks starting at e with length <= max_len,
 * children in increasing directed-edge index. visit(std::span<const int>)
 * is called for every prefix, the zero-length walk included.
 */
template <class Visitor>
void for_each_walk(const PlanarGraph& graph, int e, int max_len, Visitor&& visit)
{
    std::vector<int> path{e};
    std::vector<std::size_t> cursor{0};
    visit(std::span<const int>(path));
    while (!path.empty()) {
        const int current = path.back();
        if (static_cast<int>(path.size()) - 1 >= max_len) {
            path.pop_back();
            cursor.pop_back();
            continue;
        }
        const auto outs = graph.out_edges(graph.head(current));
        std::size_t c = cursor.back();
        while (c < outs.size() && outs[c] == reversed(current))
            ++c;
        if (c == outs.size()) {
            path.pop_back();
            cursor.pop_back();
            continue;
        }
        cursor.back() = c + 1;
        path.push_back(outs[c]);
        cursor.push_back(0);
        visit(std::span<const int>(path));
    }
}

/// W_r(e, g) for all r <= max_len, in depth-first lexicographic order.
std::vector<Walk> enumerate_walks(const PlanarGraph& graph, const Eigen::VectorXd& x, int e, int g,
                                  int max_len, std::size_t cap = kDefaultWalkCap);

/// Sum of w over W_r(e, g) for r = 0..max_len, by enumeration.
std::vector<std::complex<double>> walk_sums_by_length(const PlanarGraph& graph, const Eigen::VectorXd& x,
                                                      int e, int g, int max_len,
                                                      std::size_t cap = kDefaultWalkCap);

/// Closed paths of length <= max_len, each cyclic class once per orientation.
std::vector<Walk> enumerate_closed_paths(const PlanarGraph& graph, const Eigen::VectorXd& x, int max_len,
                                         std::size_t cap = kDefaultWalkCap);

/// Sum of w over closed walks of length exactly r, by enumeration.
std::complex<double> closed_walk_sum(const PlanarGraph& graph, const Eigen::VectorXd& x, int r,
                                     std::size_t cap = kDefaultWalkCap);

/// Self-crossings of a closed path, at shared vertices and at edge crossings.
int self_crossings(const PlanarGraph& graph, std::span<const int> closed_path);

/// Crossings between two edge-disjoint closed paths.
int mutual_crossings(const PlanarGraph& graph, std::span<const int> first, std::span<const int> second);

struct WhitneyCheck
{
    int crossings = 0;
    std::complex<double> phase;  // -exp(i alpha / 2)
    double error = 0.0;          // |phase - (-1)^crossings|
};

WhitneyCheck whitney_check(const PlanarGraph& graph, std::span<const int> closed_path);

struct EvenSubgraph
{
    std::uint64_t mask = 0;
    int crossings = 0;
    double monomial = 1.0;

    double signed_weight() const { return (crossings % 2 ? -1.0 : 1.0) * monomial; }
};

inline constexpr int kCycleSpaceCap = 24;

inline std::uint64_t all_edges(const PlanarGraph& graph)
{
    return graph.num_edges() >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << graph.num_edges()) - 1;
}

/// Fundamental-cycle basis of the even subgraphs using only allowed edges.
struct CycleSpace
{
    std::vector<std::uint64_t> basis;
    std::vector<std::uint64_t> root_path;  // tree edges from each vertex to its component root
    std::vector<int> root;

    /// Edge set whose odd-degree vertices are exactly {u, v} (empty for u == v), if connected.
    std::optional<std::uint64_t> join(int u, int v) const;
};

CycleSpace cycle_space(const PlanarGraph& graph, std::uint64_t allowed);

/// Visits start ^ (every combination of basis) in Gray-code order.
template <class Visitor>
void for_each_combination(std::span<const std::uint64_t> basis, std::uint64_t start, Visitor&& visit)
{
    std::uint64_t mask = start;
    visit(mask);
    const std::uint64_t count = std::uint64_t{1} << basis.size();
    for (std::uint64_t i = 1; i < count; ++i) {
        mask ^= basis[static_cast<std::size_t>(__builtin_ctzll(i))];
        visit(mask);
    }
}

double monomial(const Eigen::VectorXd& x, std::uint64_t mask);

std::vector<EvenSubgraph> enumerate_even(const PlanarGraph& graph, const Eigen::VectorXd& x,
                                         int cap = kCycleSpaceCap);

/// Signed even-subgraph generating function over the allowed edges.
double oracle_Z(const PlanarGraph& graph, const Eigen::VectorXd& x, std::uint64_t allowed,
                int cap = kCycleSpaceCap);
double oracle_Z(const PlanarGraph& graph, const Eigen::VectorXd& x, int cap = kCycleSpaceCap);

/// True when the cycle space of the graph is small enough for exhaustive enumeration.
bool oracle_feasible(const PlanarGraph& graph, int cap = kCycleSpaceCap);

struct LogZEstimate
{
    double log_z = 0.0;
    double imaginary = 0.0;  // should vanish; reported for diagnostics
    double tail = 0.0;
};

/**
 * -sum over closed walks of w / (2 |walk|), truncated at length R.
 *
 * Closed walks of length r are summed as tr(Lambda^r). Requires
 * |x| < 1/(Delta - 1) unless allow_uncertified is set.
 */
LogZEstimate closed_walk_logZ(const PlanarGraph& graph, const Eigen::VectorXd& x, int R,
                              bool allow_uncertified = false);

// Exact walk sums restricted by visits, via resolvents of principal submatrices of Lambda.

/// Sum over V(e, g): walks through the edge of e only at the start and not through the edge of g before the end.
std::complex<double> first_visit_sum(const SparseOperator<double>& lambda, int e, int g);

/// Sum over U(e, e): walks from e back to e that never traverse -e.
std::complex<double> avoiding_sum(const SparseOperator<double>& lambda, int e);

/// Sum over W(g, g) in the graph with the undirected edge of e removed.
std::complex<double> removed_edge_return_sum(const SparseOperator<double>& lambda, int e, int g);

} // namespace kacward

#endif // KACWARD_WALKS_HPP
