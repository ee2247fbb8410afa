#include "kacward/walks.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>
#include <sstream>

namespace kacward {

namespace {

using cplx = std::complex<double>;

double normalized(double angle)
{
    angle = std::fmod(angle, 2 * std::numbers::pi);
    return angle < 0 ? angle + 2 * std::numbers::pi : angle;
}

// One passage of a closed curve through a vertex: the incoming and outgoing germs.
struct Visit
{
    int vertex;
    double in;
    double out;
};

bool strictly_inside(double from, double to, double angle)
{
    const double offset = normalized(angle - from);
    return offset > 0 && offset < normalized(to - from);
}

bool interleaved(const Visit& a, const Visit& b)
{
    return strictly_inside(a.in, a.out, b.in) != strictly_inside(a.in, a.out, b.out);
}

std::vector<Visit> visits(const PlanarGraph& graph, std::span<const int> closed)
{
    std::vector<Visit> result;
    const int n = static_cast<int>(closed.size()) - 1;
    for (int i = 0; i < n; ++i)
        result.push_back({graph.head(closed[i]), std::arg(-graph.direction(closed[i])),
                          std::arg(graph.direction(closed[i + 1]))});
    return result;
}

void require_closed_path(const PlanarGraph& graph, std::span<const int> edges)
{
    if (edges.size() < 2 || edges.front() != edges.back() || !is_walk(graph, edges) || !is_path(edges))
        throw Error(ErrorKind::invalid_argument, "expected a closed path");
}

void check_cap(std::size_t count, std::size_t cap)
{
    if (count > cap) {
        std::ostringstream os;
        os << "walk enumeration cap exceeded after " << count << " walks";
        throw Error(ErrorKind::cap_exceeded, os.str());
    }
}

Eigen::MatrixXcd principal(const Eigen::MatrixXcd& dense, const std::vector<int>& index)
{
    const auto k = static_cast<Eigen::Index>(index.size());
    Eigen::MatrixXcd sub(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j)
            sub(i, j) = dense(index[i], index[j]);
    return sub;
}

std::vector<int> complement(int n, std::initializer_list<int> excluded)
{
    std::vector<int> keep;
    for (int i = 0; i < n; ++i)
        if (std::find(excluded.begin(), excluded.end(), i) == excluded.end())
            keep.push_back(i);
    return keep;
}

} // namespace

bool is_walk(const PlanarGraph& graph, std::span<const int> edges)
{
    if (edges.empty())
        return false;
    for (int d : edges)
        if (d < 0 || d >= graph.num_directed())
            return false;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        if (graph.head(edges[i]) != graph.tail(edges[i + 1]) || edges[i + 1] == reversed(edges[i]))
            return false;
    return true;
}

bool is_path(std::span<const int> edges)
{
    std::vector<int> used;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        used.push_back(undirected(edges[i]));
    std::sort(used.begin(), used.end());
    return std::adjacent_find(used.begin(), used.end()) == used.end();
}

double winding(const PlanarGraph& graph, std::span<const int> edges)
{
    double alpha = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        alpha += turning_angle(graph, edges[i], edges[i + 1]);
    return alpha;
}

cplx walk_weight(const PlanarGraph& graph, const Eigen::VectorXd& x, std::span<const int> edges)
{
    double product = 1.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        product *= x[undirected(edges[i])];
    return std::polar(product, winding(graph, edges) / 2);
}

Walk make_walk(const PlanarGraph& graph, const Eigen::VectorXd& x, std::vector<int> edges)
{
    if (!is_walk(graph, edges))
        throw Error(ErrorKind::invalid_argument, "edge sequence is not a non-backtracking walk");
    Walk walk;
    walk.edges = std::move(edges);
    walk.winding = winding(graph, walk.edges);
    walk.weight = walk_weight(graph, x, walk.edges);
    return walk;
}

Walk reversed_walk(const PlanarGraph& graph, const Eigen::VectorXd& x, const Walk& walk)
{
    std::vector<int> edges(walk.edges.rbegin(), walk.edges.rend());
    for (int& d : edges)
        d = reversed(d);
    return make_walk(graph, x, std::move(edges));
}

std::vector<Walk> enumerate_walks(const PlanarGraph& graph, const Eigen::VectorXd& x, int e, int g,
                                  int max_len, std::size_t cap)
{
    std::vector<Walk> result;
    std::size_t explored = 0;
    for_each_walk(graph, e, max_len, [&](std::span<const int> path) {
        check_cap(++explored, cap);
        if (path.back() == g)
            result.push_back(make_walk(graph, x, {path.begin(), path.end()}));
    });
    return result;
}

std::vector<cplx> walk_sums_by_length(const PlanarGraph& graph, const Eigen::VectorXd& x, int e, int g,
                                      int max_len, std::size_t cap)
{
    std::vector<cplx> sums(static_cast<std::size_t>(max_len) + 1, 0.0);
    std::size_t explored = 0;
    for_each_walk(graph, e, max_len, [&](std::span<const int> path) {
        check_cap(++explored, cap);
        if (path.back() == g)
            sums[path.size() - 1] += walk_weight(graph, x, path);
    });
    return sums;
}

std::vector<Walk> enumerate_closed_paths(const PlanarGraph& graph, const Eigen::VectorXd& x, int max_len,
                                         std::size_t cap)
{
    std::vector<Walk> result;
    std::size_t explored = 0;
    std::vector<char> used(graph.num_edges(), 0);
    for (int start = 0; start < graph.num_directed(); ++start) {
        // Canonical rotation: the start edge has the smallest undirected index on the path.
        const int floor = undirected(start);
        std::vector<int> path{start};
        std::vector<std::size_t> cursor{0};
        used[floor] = 1;
        while (!path.empty()) {
            const int current = path.back();
            const auto outs = graph.out_edges(graph.head(current));
            std::size_t c = cursor.back();
            bool advanced = false;
            if (static_cast<int>(path.size()) <= max_len) {
                for (; c < outs.size(); ++c) {
                    const int next = outs[c];
                    if (next == reversed(current) || undirected(next) < floor)
                        continue;
                    if (next == start) {
                        check_cap(++explored, cap);
                        std::vector<int> closed = path;
                        closed.push_back(start);
                        result.push_back(make_walk(graph, x, std::move(closed)));
                        continue;
                    }
                    if (used[undirected(next)])
                        continue;
                    check_cap(++explored, cap);
                    cursor.back() = c + 1;
                    used[undirected(next)] = 1;
                    path.push_back(next);
                    cursor.push_back(0);
                    advanced = true;
                    break;
                }
            }
            if (!advanced) {
                used[undirected(path.back())] = 0;
                path.pop_back();
                cursor.pop_back();
            }
        }
    }
    return result;
}

cplx closed_walk_sum(const PlanarGraph& graph, const Eigen::VectorXd& x, int r, std::size_t cap)
{
    cplx total = 0.0;
    std::size_t explored = 0;
    for (int e = 0; e < graph.num_directed(); ++e)
        for_each_walk(graph, e, r, [&](std::span<const int> path) {
            check_cap(++explored, cap);
            if (static_cast<int>(path.size()) - 1 == r && path.back() == e)
                total += walk_weight(graph, x, path);
        });
    return total;
}

int self_crossings(const PlanarGraph& graph, std::span<const int> closed_path)
{
    require_closed_path(graph, closed_path);
    const auto passes = visits(graph, closed_path);
    int count = 0;
    for (std::size_t i = 0; i < passes.size(); ++i)
        for (std::size_t j = i + 1; j < passes.size(); ++j)
            if (passes[i].vertex == passes[j].vertex && interleaved(passes[i], passes[j]))
                ++count;
    const std::size_t n = closed_path.size() - 1;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (graph.crosses(undirected(closed_path[i]), undirected(closed_path[j])))
                ++count;
    return count;
}

int mutual_crossings(const PlanarGraph& graph, std::span<const int> first, std::span<const int> second)
{
    require_closed_path(graph, first);
    require_closed_path(graph, second);
    for (std::size_t i = 0; i + 1 < first.size(); ++i)
        for (std::size_t j = 0; j + 1 < second.size(); ++j)
            if (undirected(first[i]) == undirected(second[j]))
                throw Error(ErrorKind::invalid_argument, "closed paths are not edge-disjoint");
    const auto a = visits(graph, first), b = visits(graph, second);
    int count = 0;
    for (const Visit& p : a)
        for (const Visit& q : b)
            if (p.vertex == q.vertex && interleaved(p, q))
                ++count;
    for (std::size_t i = 0; i + 1 < first.size(); ++i)
        for (std::size_t j = 0; j + 1 < second.size(); ++j)
            if (graph.crosses(undirected(first[i]), undirected(second[j])))
                ++count;
    return count;
}

WhitneyCheck whitney_check(const PlanarGraph& graph, std::span<const int> closed_path)
{
    WhitneyCheck check;
    check.crossings = self_crossings(graph, closed_path);
    check.phase = -std::polar(1.0, winding(graph, closed_path) / 2);
    check.error = std::abs(check.phase - cplx(check.crossings % 2 ? -1.0 : 1.0));
    return check;
}

std::optional<std::uint64_t> CycleSpace::join(int u, int v) const
{
    if (root[u] != root[v])
        return std::nullopt;
    return root_path[u] ^ root_path[v];
}

CycleSpace cycle_space(const PlanarGraph& graph, std::uint64_t allowed)
{
    if (graph.num_edges() > 64)
        throw Error(ErrorKind::cap_exceeded, "even-subgraph enumeration supports at most 64 edges");
    allowed &= all_edges(graph);
    const int n = graph.num_vertices();
    CycleSpace space;
    space.root.assign(n, -1);
    space.root_path.assign(n, 0);
    std::vector<char> tree(graph.num_edges(), 0);
    for (int r = 0; r < n; ++r) {
        if (space.root[r] >= 0)
            continue;
        space.root[r] = r;
        std::deque<int> queue{r};
        while (!queue.empty()) {
            const int v = queue.front();
            queue.pop_front();
            for (int d : graph.out_edges(v)) {
                const int k = undirected(d);
                const int w = graph.head(d);
                if (!((allowed >> k) & 1u) || space.root[w] >= 0)
                    continue;
                space.root[w] = r;
                space.root_path[w] = space.root_path[v] ^ (std::uint64_t{1} << k);
                tree[k] = 1;
                queue.push_back(w);
            }
        }
    }
    for (int k = 0; k < graph.num_edges(); ++k) {
        if (!((allowed >> k) & 1u) || tree[k])
            continue;
        const auto [u, v] = graph.edge(k);
        space.basis.push_back((std::uint64_t{1} << k) ^ space.root_path[u] ^ space.root_path[v]);
    }
    return space;
}

double monomial(const Eigen::VectorXd& x, std::uint64_t mask)
{
    double product = 1.0;
    while (mask) {
        product *= x[__builtin_ctzll(mask)];
        mask &= mask - 1;
    }
    return product;
}

bool oracle_feasible(const PlanarGraph& graph, int cap)
{
    if (graph.num_edges() > 64)
        return false;
    return static_cast<int>(cycle_space(graph, all_edges(graph)).basis.size()) <= cap;
}

namespace {

CycleSpace checked_space(const PlanarGraph& graph, std::uint64_t allowed, int cap)
{
    CycleSpace space = cycle_space(graph, allowed);
    if (static_cast<int>(space.basis.size()) > cap) {
        std::ostringstream os;
        os << "cycle space dimension " << space.basis.size() << " exceeds the enumeration cap " << cap;
        throw Error(ErrorKind::cap_exceeded, os.str());
    }
    return space;
}

} // namespace

std::vector<EvenSubgraph> enumerate_even(const PlanarGraph& graph, const Eigen::VectorXd& x, int cap)
{
    const CycleSpace space = checked_space(graph, all_edges(graph), cap);
    std::vector<EvenSubgraph> result;
    for_each_combination(space.basis, 0, [&](std::uint64_t mask) {
        result.push_back({mask, count_crossings(graph, mask), monomial(x, mask)});
    });
    std::sort(result.begin(), result.end(),
              [](const EvenSubgraph& a, const EvenSubgraph& b) { return a.mask < b.mask; });
    return result;
}

double oracle_Z(const PlanarGraph& graph, const Eigen::VectorXd& x, std::uint64_t allowed, int cap)
{
    const CycleSpace space = checked_space(graph, allowed, cap);
    double z = 0.0;
    const bool crossing_free = !graph.has_crossings();
    for_each_combination(space.basis, 0, [&](std::uint64_t mask) {
        const double term = monomial(x, mask);
        z += (crossing_free || count_crossings(graph, mask) % 2 == 0) ? term : -term;
    });
    return z;
}

double oracle_Z(const PlanarGraph& graph, const Eigen::VectorXd& x, int cap)
{
    return oracle_Z(graph, x, all_edges(graph), cap);
}

LogZEstimate closed_walk_logZ(const PlanarGraph& graph, const Eigen::VectorXd& x, int R, bool allow_uncertified)
{
    const TailBound bound = small_weight_bound(graph, x);
    if (!bound.converges() && !allow_uncertified)
        throw Error(ErrorKind::refused, "closed-walk expansion needs |x| < 1/(Delta - 1)");
    const auto lambda = transition_matrix(graph, x);
    const Eigen::Index n = lambda.rows();
    Eigen::MatrixXcd power = Eigen::MatrixXcd::Identity(n, n);
    cplx sum = 0.0;
    for (int r = 1; r <= R; ++r) {
        power = power * lambda;
        sum += power.trace() / (2.0 * r);
    }
    LogZEstimate estimate;
    estimate.log_z = -sum.real();
    estimate.imaginary = -sum.imag();
    const double q = bound.epsilon;
    estimate.tail = bound.converges()
                        ? graph.num_edges() * std::pow(q, R + 1) / ((R + 1) * (1.0 - q))
                        : std::numeric_limits<double>::infinity();
    return estimate;
}

cplx first_visit_sum(const SparseOperator<double>& lambda, int e, int g)
{
    const Eigen::MatrixXcd dense(lambda);
    const int n = static_cast<int>(dense.rows());
    const std::vector<int> keep = complement(n, {e, reversed(e), g, reversed(g)});
    const auto k = static_cast<Eigen::Index>(keep.size());
    if (k == 0)
        return dense(e, g);
    Eigen::VectorXcd row(k), column(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        row[i] = dense(e, keep[i]);
        column[i] = dense(keep[i], g);
    }
    const Eigen::MatrixXcd system = Eigen::MatrixXcd::Identity(k, k) - principal(dense, keep);
    const Eigen::VectorXcd y = system.partialPivLu().solve(column);
    return dense(e, g) + row.cwiseProduct(y).sum();
}

cplx avoiding_sum(const SparseOperator<double>& lambda, int e)
{
    const Eigen::MatrixXcd dense(lambda);
    const std::vector<int> keep = complement(static_cast<int>(dense.rows()), {reversed(e)});
    const auto k = static_cast<Eigen::Index>(keep.size());
    const Eigen::MatrixXcd inverse = (Eigen::MatrixXcd::Identity(k, k) - principal(dense, keep)).inverse();
    const auto at = std::find(keep.begin(), keep.end(), e) - keep.begin();
    return inverse(at, at);
}

cplx removed_edge_return_sum(const SparseOperator<double>& lambda, int e, int g)
{
    if (undirected(g) == undirected(e))
        throw Error(ErrorKind::invalid_argument, "g must avoid the removed edge");
    const Eigen::MatrixXcd dense(lambda);
    const std::vector<int> keep = complement(static_cast<int>(dense.rows()), {e, reversed(e)});
    const auto k = static_cast<Eigen::Index>(keep.size());
    const Eigen::MatrixXcd inverse = (Eigen::MatrixXcd::Identity(k, k) - principal(dense, keep)).inverse();
    const auto at = std::find(keep.begin(), keep.end(), g) - keep.begin();
    return inverse(at, at);
}

} // namespace kacward
