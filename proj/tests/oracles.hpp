#ifndef KACWARD_TESTS_ORACLES_HPP
#define KACWARD_TESTS_ORACLES_HPP

// Independent reference computations and fixtures for the tests.
// Nothing here calls into the enumeration or operator code under test.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "kacward/geometry.hpp"

namespace oracle {

using kacward::PlanarGraph;
using kacward::Point;

inline double orient(Point a, Point b, Point c)
{
    return (b.real() - a.real()) * (c.imag() - a.imag()) - (b.imag() - a.imag()) * (c.real() - a.real());
}

// Proper crossing of two segments with four distinct endpoints in general position.
inline bool segments_cross(Point a, Point b, Point c, Point d)
{
    const double o1 = orient(a, b, c), o2 = orient(a, b, d);
    const double o3 = orient(c, d, a), o4 = orient(c, d, b);
    return o1 * o2 < 0 && o3 * o4 < 0;
}

inline double point_segment_distance(Point p, Point a, Point b)
{
    const Point ab = b - a;
    const double t = std::clamp(((p - a) * std::conj(ab)).real() / std::norm(ab), 0.0, 1.0);
    return std::abs(p - (a + t * ab));
}

inline bool share_vertex(const std::array<int, 2>& e, const std::array<int, 2>& f)
{
    return e[0] == f[0] || e[0] == f[1] || e[1] == f[0] || e[1] == f[1];
}

// Z = sum over all edge subsets with even degrees of (-1)^crossings prod x, by scanning every subset.
inline double brute_force_Z(const PlanarGraph& graph, const Eigen::VectorXd& x)
{
    const int m = graph.num_edges();
    const int n = graph.num_vertices();
    double z = 0.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
        std::vector<int> degree(n, 0);
        double weight = 1.0;
        std::vector<int> chosen;
        for (int k = 0; k < m; ++k)
            if ((mask >> k) & 1u) {
                chosen.push_back(k);
                ++degree[graph.edge(k)[0]];
                ++degree[graph.edge(k)[1]];
                weight *= x[k];
            }
        if (std::any_of(degree.begin(), degree.end(), [](int d) { return d % 2; }))
            continue;
        int crossings = 0;
        for (std::size_t i = 0; i < chosen.size(); ++i)
            for (std::size_t j = i + 1; j < chosen.size(); ++j) {
                const auto& e = graph.edge(chosen[i]);
                const auto& f = graph.edge(chosen[j]);
                if (!share_vertex(e, f) &&
                    segments_cross(graph.vertex(e[0]), graph.vertex(e[1]), graph.vertex(f[0]), graph.vertex(f[1])))
                    ++crossings;
            }
        z += (crossings % 2 ? -1.0 : 1.0) * weight;
    }
    return z;
}

/**
 * Random straight-line graph on points in the unit square. Candidate edges
 * are added in random order, skipping any that pass near a vertex or, when
 * crossings are not allowed, cross an accepted edge.
 */
inline PlanarGraph random_graph(std::mt19937_64& rng, int vertices, int edges, bool allow_crossings)
{
    std::uniform_real_distribution<double> coord(0.0, 1.0);
    std::vector<Point> points;
    while (static_cast<int>(points.size()) < vertices) {
        const Point p(coord(rng), coord(rng));
        bool far = true;
        for (const Point& q : points)
            far = far && std::abs(p - q) > 0.05;
        if (far)
            points.push_back(p);
    }
    std::vector<std::array<int, 2>> candidates;
    for (int u = 0; u < vertices; ++u)
        for (int v = u + 1; v < vertices; ++v)
            candidates.push_back({u, v});
    std::shuffle(candidates.begin(), candidates.end(), rng);
    std::vector<std::array<int, 2>> accepted;
    for (const auto& c : candidates) {
        if (static_cast<int>(accepted.size()) == edges)
            break;
        const Point a = points[c[0]], b = points[c[1]];
        bool ok = true;
        for (int w = 0; w < vertices && ok; ++w)
            if (w != c[0] && w != c[1] && point_segment_distance(points[w], a, b) < 1e-3)
                ok = false;
        for (const auto& f : accepted) {
            if (!ok)
                break;
            if (share_vertex(c, f))
                continue;
            const Point p = points[f[0]], q = points[f[1]];
            if (segments_cross(a, b, p, q)) {
                if (!allow_crossings)
                    ok = false;
                // keep crossings well away from the endpoints
                else if (std::min({std::abs(orient(a, b, p)), std::abs(orient(a, b, q)), std::abs(orient(p, q, a)),
                                   std::abs(orient(p, q, b))}) < 1e-3)
                    ok = false;
            }
        }
        if (ok)
            accepted.push_back(c);
    }
    return PlanarGraph(std::move(points), std::move(accepted));
}

inline Eigen::VectorXd random_weights(std::mt19937_64& rng, int edges, double lo = 0.05, double hi = 0.95)
{
    std::uniform_real_distribution<double> dist(lo, hi);
    Eigen::VectorXd x(edges);
    for (int k = 0; k < edges; ++k)
        x[k] = dist(rng);
    return x;
}

inline PlanarGraph four_cycle()
{
    return PlanarGraph({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
}

// Unit square with both diagonals: one crossing.
inline PlanarGraph k4_with_crossing()
{
    return PlanarGraph({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}, {1, 3}});
}

inline PlanarGraph hexagon()
{
    std::vector<Point> points;
    std::vector<std::array<int, 2>> edges;
    for (int k = 0; k < 6; ++k) {
        points.push_back(std::polar(1.0, k * std::numbers::pi / 3));
        edges.push_back({k, (k + 1) % 6});
    }
    return PlanarGraph(std::move(points), std::move(edges));
}

// A closed curve 0 -> 1 -> 2 -> 3 -> 0 through the centre twice, drawn with one crossing.
inline PlanarGraph bowtie()
{
    return PlanarGraph({{0, 0}, {2, 2}, {2, 0}, {0, 2}}, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
}

// Directed edge of graph from u to v.
inline int directed(const PlanarGraph& graph, int u, int v)
{
    for (int d : graph.out_edges(u))
        if (graph.head(d) == v)
            return d;
    return -1;
}

// Total winding of a walk, summing the turning angle of every step.
inline double walk_winding(const PlanarGraph& graph, const std::vector<int>& walk)
{
    double alpha = 0.0;
    for (std::size_t i = 0; i + 1 < walk.size(); ++i) {
        const Point a = graph.direction(walk[i]), b = graph.direction(walk[i + 1]);
        alpha += std::arg(b / a);
    }
    return alpha;
}

// xi by plain bisection on s in (0, 100].
inline double xi_reference(const std::vector<double>& squares)
{
    if (squares.size() <= 1)
        return 0.0;
    double lo = 0.0, hi = 100.0;
    for (int it = 0; it < 300; ++it) {
        const double s = 0.5 * (lo + hi);
        double sum = 0.0;
        for (double a : squares)
            sum += std::atan(a / s);
        (sum > std::numbers::pi / 2 ? lo : hi) = s;
    }
    return 0.5 * (lo + hi);
}

} // namespace oracle

#endif // KACWARD_TESTS_ORACLES_HPP
