#include "kacward/fermion.hpp"

#include <cmath>
#include <limits>

namespace kacward {

namespace {

using cplx = std::complex<double>;

std::uint64_t bit(int k) { return std::uint64_t{1} << k; }

} // namespace

bool in_fermion_family(const PlanarGraph& graph, int e, int g, std::uint64_t mask)
{
    if (g == reversed(e) || graph.num_edges() > 64)
        return false;
    if ((mask & (bit(undirected(e)) | bit(undirected(g)))) || (mask & ~all_edges(graph)))
        return false;
    std::vector<int> degree(graph.num_vertices(), 0);
    for (std::uint64_t m = mask; m; m &= m - 1) {
        const auto [u, v] = graph.edge(__builtin_ctzll(m));
        ++degree[u];
        ++degree[v];
    }
    ++degree[graph.head(e)];
    ++degree[graph.tail(g)];
    for (int d : degree)
        if (d % 2)
            return false;
    return true;
}

std::vector<int> leftmost_path(const PlanarGraph& graph, int e, int g, std::uint64_t mask)
{
    if (!in_fermion_family(graph, e, g, mask))
        throw Error(ErrorKind::invalid_argument, "edge set is not a member of fE(e, g)");
    std::uint64_t remaining = mask;
    std::vector<int> path{e};
    int current = e;
    for (;;) {
        const int v = graph.head(current);
        int best = -1;
        double best_angle = -std::numeric_limits<double>::infinity();
        if (v == graph.tail(g)) {
            best = g;
            best_angle = turning_angle(graph, current, g);
        }
        for (int d : graph.out_edges(v)) {
            if (!((remaining >> undirected(d)) & 1u))
                continue;
            const double angle = turning_angle(graph, current, d);
            if (angle > best_angle) {
                best = d;
                best_angle = angle;
            }
        }
        if (best < 0)
            throw Error(ErrorKind::invalid_argument, "left-most path got stuck");
        path.push_back(best);
        if (best == g)
            return path;
        remaining &= ~bit(undirected(best));
        current = best;
    }
}

std::vector<FermionConfig> enumerate_fE(const PlanarGraph& graph, const Eigen::VectorXd& x, int e, int g, int cap)
{
    std::vector<FermionConfig> result;
    if (g == reversed(e))
        return result;
    const std::uint64_t allowed = all_edges(graph) & ~bit(undirected(e)) & ~bit(undirected(g));
    const CycleSpace space = cycle_space(graph, allowed);
    if (static_cast<int>(space.basis.size()) > cap)
        throw Error(ErrorKind::cap_exceeded, "fE enumeration exceeds the cycle-space cap");
    const auto start = space.join(graph.head(e), graph.tail(g));
    if (!start)
        return result;
    const double xe = x[undirected(e)];
    for_each_combination(space.basis, *start, [&](std::uint64_t mask) {
        FermionConfig config;
        config.mask = mask;
        config.path = leftmost_path(graph, e, g, mask);
        config.winding = winding(graph, config.path);
        config.monomial = xe * monomial(x, mask);
        result.push_back(std::move(config));
    });
    return result;
}

cplx fermionic_F(const PlanarGraph& graph, const Eigen::VectorXd& x, int e, int g, double Z, int cap)
{
    if (Z == 0.0)
        throw Error(ErrorKind::singular_operator, "fermionic generating function undefined for Z = 0");
    cplx sum = 0.0;
    for (const FermionConfig& config : enumerate_fE(graph, x, e, g, cap))
        sum += std::polar(config.monomial, -config.winding / 2);
    return (e == g ? 1.0 : 0.0) + sum / Z;
}

cplx fermionic_F(const PlanarGraph& graph, const Eigen::VectorXd& x, int e, int g, int cap)
{
    return fermionic_F(graph, x, e, g, oracle_Z(graph, x, cap), cap);
}

Eigen::MatrixXcd fermion_matrix(const PlanarGraph& graph, const Eigen::VectorXd& x, int cap)
{
    const double z = oracle_Z(graph, x, cap);
    const int n = graph.num_directed();
    Eigen::MatrixXcd f(n, n);
    for (int e = 0; e < n; ++e)
        for (int g = 0; g < n; ++g)
            f(e, g) = fermionic_F(graph, x, e, g, z, cap);
    return f;
}

cplx symmetrized_observable(const Eigen::MatrixXcd& F, int e, int g_undirected, const Eigen::VectorXd& theta)
{
    const int g = directed_of(g_undirected);
    return (F(e, g) + F(e, reversed(g))) / std::cos(theta[g_undirected] / 2);
}

ClosingSign closing_sign(const PlanarGraph& graph, int e, int g, const FermionConfig& config)
{
    if (undirected(e) == undirected(g))
        throw Error(ErrorKind::invalid_argument, "closing curve needs distinct edges");

    std::vector<Point> vertices = graph.vertices();
    std::vector<std::array<int, 2>> edges;
    for (std::uint64_t m = config.mask; m; m &= m - 1)
        edges.push_back(graph.edge(__builtin_ctzll(m)));
    const int me = static_cast<int>(vertices.size());
    const int mg = me + 1;
    vertices.push_back(graph.midpoint(e));
    vertices.push_back(graph.midpoint(g));
    edges.push_back({me, graph.head(e)});
    edges.push_back({graph.tail(g), mg});

    const Point from = graph.midpoint(g), to = graph.midpoint(e);
    const Point normal = (to - from) * Point(0.0, 1.0);
    // Straight closing segment first, then detours on alternating sides.
    const double offsets[] = {0.0, 0.1, -0.1, 0.23, -0.23, 0.37, -0.37, 0.61, -0.61, 1.3, -1.3};
    for (double offset : offsets) {
        std::vector<Point> points = vertices;
        std::vector<std::array<int, 2>> segments = edges;
        std::vector<Point> curve;  // directions of the closing segments, from m(g) to m(e)
        if (offset == 0.0) {
            segments.push_back({mg, me});
            curve.push_back(to - from);
        } else {
            const Point via = 0.5 * (from + to) + offset * normal;
            const int v = static_cast<int>(points.size());
            points.push_back(via);
            segments.push_back({mg, v});
            segments.push_back({v, me});
            curve.push_back(via - from);
            curve.push_back(to - via);
        }
        PlanarGraph closed;
        try {
            closed = PlanarGraph(std::move(points), std::move(segments));
        } catch (const Error&) {
            continue;
        }
        double beta = turning_angle(graph.direction(g), curve.front()) +
                      turning_angle(curve.back(), graph.direction(e));
        if (curve.size() == 2)
            beta += turning_angle(curve[0], curve[1]);
        ClosingSign sign;
        sign.crossings = count_crossings(closed);
        sign.phase = -std::polar(1.0, (config.winding + beta) / 2);
        sign.error = std::abs(sign.phase - cplx(sign.crossings % 2 ? -1.0 : 1.0));
        sign.detour = offset != 0.0;
        return sign;
    }
    throw Error(ErrorKind::invalid_graph, "no admissible closing curve found");
}

} // namespace kacward
