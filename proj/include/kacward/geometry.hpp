#ifndef KACWARD_GEOMETRY_HPP
#define KACWARD_GEOMETRY_HPP

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "kacward/error.hpp"

namespace kacward {

/// Points of the plane are complex numbers z = x + iy.
using Point = std::complex<double>;

/// Two points closer than this are the same vertex.
inline constexpr double kGeometricTolerance = 1e-9;

/// Undirected edge k yields directed edges 2k (as listed) and 2k+1 (reversed).
constexpr int reversed(int directed) { return directed ^ 1; }
constexpr int undirected(int directed) { return directed >> 1; }
constexpr int directed_of(int edge, bool reverse = false) { return 2 * edge + (reverse ? 1 : 0); }

struct DirectedEdge
{
    int tail;
    int head;
    int index;
};

/// Turning angle Arg(dir_g / dir_e) on the principal branch (-pi, pi].
double turning_angle(Point dir_e, Point dir_g);

struct Violation
{
    int edge_a;
    int edge_b;
    std::string reason;
};

/// Result of checking the pairwise-intersection rule: any two edges share at
/// most one point, which is a common endpoint or a crossing interior to both.
struct ValidationReport
{
    std::vector<Violation> violations;
    std::vector<std::pair<int, int>> crossings;

    bool ok() const { return violations.empty(); }
};

ValidationReport validate(std::span<const Point> vertices, std::span<const std::array<int, 2>> edges);

/**
 * Straight-line embedded graph with directed-edge indexing and a registry of
 * crossing edge pairs.
 *
 * Construction validates the embedding and throws on any violation. The
 * object is immutable afterwards.
 */
class PlanarGraph
{
public:
    PlanarGraph() = default;
    PlanarGraph(std::vector<Point> vertices, std::vector<std::array<int, 2>> edges);

    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_edges() const { return static_cast<int>(edges_.size()); }
    int num_directed() const { return 2 * num_edges(); }
    int max_degree() const { return max_degree_; }

    Point vertex(int v) const { return vertices_[v]; }
    const std::vector<Point>& vertices() const { return vertices_; }
    const std::array<int, 2>& edge(int k) const { return edges_[k]; }
    const std::vector<std::array<int, 2>>& edges() const { return edges_; }

    int tail(int d) const { return edges_[undirected(d)][d & 1]; }
    int head(int d) const { return edges_[undirected(d)][1 - (d & 1)]; }
    DirectedEdge directed(int d) const { return {tail(d), head(d), d}; }
    Point direction(int d) const { return vertex(head(d)) - vertex(tail(d)); }
    Point midpoint(int d) const { return 0.5 * (vertex(head(d)) + vertex(tail(d))); }

    /// Directed edges leaving v, in increasing index order.
    std::span<const int> out_edges(int v) const { return out_[v]; }
    int degree(int v) const { return static_cast<int>(out_[v].size()); }

    const std::vector<std::pair<int, int>>& crossings() const { return crossings_; }
    bool crosses(int a, int b) const;
    bool has_crossings() const { return !crossings_.empty(); }

    /// Index of the undirected edge joining u and v, or -1.
    int find_edge(int u, int v) const;

    /// Same vertex set, keeping only the listed undirected edges (in the given order).
    PlanarGraph subgraph(std::span<const int> keep) const;

private:
    std::vector<Point> vertices_;
    std::vector<std::array<int, 2>> edges_;
    std::vector<std::vector<int>> out_;
    std::vector<std::pair<int, int>> crossings_;
    std::vector<std::vector<int>> crossing_partners_;
    int max_degree_ = 0;
};

double turning_angle(const PlanarGraph& graph, int e, int g);

/// Number of unordered pairs of edges that cross.
int count_crossings(const PlanarGraph& graph);

/// Number of registered crossings among the edges selected by mask (|G| <= 64).
int count_crossings(const PlanarGraph& graph, std::uint64_t edge_mask);

/**
 * The graph G_{e,g}: G without the undirected edges of e and g, plus the
 * half-edges {m(e), h(e)} (weight x_e) and {t(g), m(g)} (weight 1).
 *
 * When g = -e both half-edges are the same segment and only one edge is
 * stored (half_in == half_out).
 */
struct ModifiedGraph
{
    PlanarGraph graph;
    Eigen::VectorXd weights;
    std::vector<int> base_edge;  // base edge of each edge of graph, -1 for half-edges
    int half_in = -1;
    int half_out = -1;
    int mid_in = -1;   // vertex m(e)
    int mid_out = -1;  // vertex m(g)
};

ModifiedGraph modify_graph(const PlanarGraph& graph, const Eigen::VectorXd& x, int e, int g);

} // namespace kacward

#endif // KACWARD_GEOMETRY_HPP
