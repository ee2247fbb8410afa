#include "kacward/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <tuple>

namespace kacward {

namespace {

double cross(Point a, Point b) { return a.real() * b.imag() - a.imag() * b.real(); }
double dot(Point a, Point b) { return a.real() * b.real() + a.imag() * b.imag(); }

// Sign of orient(a, b, c) with a distance tolerance measured from the line ab.
int side(Point a, Point b, Point c)
{
    const double o = cross(b - a, c - a);
    if (std::abs(o) <= kGeometricTolerance * std::abs(b - a))
        return 0;
    return o > 0 ? 1 : -1;
}

// For p collinear with ab: does p lie on the closed segment?
bool within(Point p, Point a, Point b)
{
    const double len = std::abs(b - a);
    const double s = dot(p - a, b - a) / len;
    return s >= -kGeometricTolerance && s <= len + kGeometricTolerance;
}

bool same_point(Point a, Point b) { return std::abs(a - b) < kGeometricTolerance; }

enum class Contact { disjoint, endpoint, crossing, overlap, touch };

Contact classify(Point a, Point b, Point c, Point d)
{
    // Bounding boxes.
    const double t = kGeometricTolerance;
    if (std::max(a.real(), b.real()) < std::min(c.real(), d.real()) - t ||
        std::max(c.real(), d.real()) < std::min(a.real(), b.real()) - t ||
        std::max(a.imag(), b.imag()) < std::min(c.imag(), d.imag()) - t ||
        std::max(c.imag(), d.imag()) < std::min(a.imag(), b.imag()) - t)
        return Contact::disjoint;

    const bool ac = same_point(a, c), ad = same_point(a, d), bc = same_point(b, c), bd = same_point(b, d);
    if ((ac && bd) || (ad && bc))
        return Contact::overlap;
    if (ac || ad || bc || bd) {
        const Point shared = (ac || ad) ? a : b;
        const Point p = (ac || ad) ? b : a;
        const Point q = (ac || bc) ? d : c;
        if (side(shared, p, q) == 0 && dot(p - shared, q - shared) > 0)
            return Contact::overlap;
        return Contact::endpoint;
    }

    const int s1 = side(a, b, c), s2 = side(a, b, d);
    const int s3 = side(c, d, a), s4 = side(c, d, b);
    if (s1 == 0 && s2 == 0) {
        // Collinear: any contact is an overlap or an endpoint touching an interior.
        if (within(c, a, b) || within(d, a, b) || within(a, c, d))
            return Contact::overlap;
        return Contact::disjoint;
    }
    if (s1 * s2 < 0 && s3 * s4 < 0)
        return Contact::crossing;
    if ((s1 == 0 && within(c, a, b)) || (s2 == 0 && within(d, a, b)) ||
        (s3 == 0 && within(a, c, d)) || (s4 == 0 && within(b, c, d)))
        return Contact::touch;
    return Contact::disjoint;
}

std::string describe(int a, int b, const char* what)
{
    std::ostringstream os;
    os << "edges " << a << " and " << b << ": " << what;
    return os.str();
}

} // namespace

double turning_angle(Point dir_e, Point dir_g)
{
    if (std::abs(dir_e) == 0.0 || std::abs(dir_g) == 0.0)
        throw Error(ErrorKind::invalid_edge, "turning angle of a zero-length edge");
    const double angle = std::atan2(cross(dir_e, dir_g), dot(dir_e, dir_g));
    return angle <= -std::numbers::pi ? std::numbers::pi : angle;
}

double turning_angle(const PlanarGraph& graph, int e, int g)
{
    if (g == reversed(e))
        return std::numbers::pi;
    return turning_angle(graph.direction(e), graph.direction(g));
}

ValidationReport validate(std::span<const Point> vertices, std::span<const std::array<int, 2>> edges)
{
    ValidationReport report;
    const int m = static_cast<int>(edges.size());
    // Sweep over edges ordered by their left end; only x-overlapping pairs are classified.
    std::vector<double> left(m), right(m);
    std::vector<int> order(m);
    for (int i = 0; i < m; ++i) {
        const Point a = vertices[edges[i][0]], b = vertices[edges[i][1]];
        left[i] = std::min(a.real(), b.real());
        right[i] = std::max(a.real(), b.real());
        order[i] = i;
    }
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return left[i] < left[j] || (left[i] == left[j] && i < j); });
    for (int pos = 0; pos < m; ++pos) {
        const int i = order[pos];
        const Point a = vertices[edges[i][0]], b = vertices[edges[i][1]];
        if (same_point(a, b)) {
            report.violations.push_back({i, i, "zero-length edge"});
            continue;
        }
        for (int next = pos + 1; next < m && left[order[next]] <= right[i] + kGeometricTolerance; ++next) {
            const int j = order[next];
            const Point c = vertices[edges[j][0]], d = vertices[edges[j][1]];
            if (same_point(c, d))
                continue;
            const int lo = std::min(i, j), hi = std::max(i, j);
            switch (classify(a, b, c, d)) {
            case Contact::disjoint:
            case Contact::endpoint:
                break;
            case Contact::crossing:
                report.crossings.emplace_back(lo, hi);
                break;
            case Contact::overlap:
                report.violations.push_back({lo, hi, describe(lo, hi, "overlap along a segment")});
                break;
            case Contact::touch:
                report.violations.push_back({lo, hi, describe(lo, hi, "an endpoint lies inside the other edge")});
                break;
            }
        }
    }
    std::sort(report.crossings.begin(), report.crossings.end());
    std::sort(report.violations.begin(), report.violations.end(), [](const Violation& p, const Violation& q) {
        return std::tie(p.edge_a, p.edge_b) < std::tie(q.edge_a, q.edge_b);
    });
    return report;
}

PlanarGraph::PlanarGraph(std::vector<Point> vertices, std::vector<std::array<int, 2>> edges)
    : vertices_(std::move(vertices)), edges_(std::move(edges))
{
    const int n = num_vertices();
    for (const Point& p : vertices_)
        if (!std::isfinite(p.real()) || !std::isfinite(p.imag()))
            throw Error(ErrorKind::invalid_graph, "non-finite vertex coordinate");
    std::vector<int> by_x(n);
    for (int u = 0; u < n; ++u)
        by_x[u] = u;
    std::stable_sort(by_x.begin(), by_x.end(),
                     [&](int u, int v) { return vertices_[u].real() < vertices_[v].real(); });
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n && vertices_[by_x[j]].real() - vertices_[by_x[i]].real() < kGeometricTolerance; ++j)
            if (same_point(vertices_[by_x[i]], vertices_[by_x[j]])) {
                const auto [u, v] = std::minmax(by_x[i], by_x[j]);
                std::ostringstream os;
                os << "vertices " << u << " and " << v << " coincide";
                throw Error(ErrorKind::invalid_graph, os.str());
            }
    for (int k = 0; k < num_edges(); ++k) {
        const auto [u, v] = edges_[k];
        if (u < 0 || v < 0 || u >= n || v >= n) {
            std::ostringstream os;
            os << "edge " << k << " references a missing vertex";
            throw Error(ErrorKind::invalid_graph, os.str());
        }
        if (u == v) {
            std::ostringstream os;
            os << "edge " << k << " is degenerate";
            throw Error(ErrorKind::invalid_edge, os.str());
        }
    }

    ValidationReport report = validate(vertices_, edges_);
    if (!report.ok())
        throw Error(ErrorKind::invalid_graph, report.violations.front().reason);
    crossings_ = std::move(report.crossings);

    out_.assign(n, {});
    for (int d = 0; d < num_directed(); ++d)
        out_[tail(d)].push_back(d);
    for (const auto& list : out_)
        max_degree_ = std::max(max_degree_, static_cast<int>(list.size()));
    crossing_partners_.assign(num_edges(), {});
    for (const auto& [a, b] : crossings_) {
        crossing_partners_[a].push_back(b);
        crossing_partners_[b].push_back(a);
    }
}

bool PlanarGraph::crosses(int a, int b) const
{
    const auto& partners = crossing_partners_[a];
    return std::find(partners.begin(), partners.end(), b) != partners.end();
}

int PlanarGraph::find_edge(int u, int v) const
{
    for (int d : out_[u])
        if (head(d) == v)
            return undirected(d);
    return -1;
}

PlanarGraph PlanarGraph::subgraph(std::span<const int> keep) const
{
    PlanarGraph sub;
    sub.vertices_ = vertices_;
    std::vector<int> position(num_edges(), -1);
    for (int i = 0; i < static_cast<int>(keep.size()); ++i) {
        position[keep[i]] = i;
        sub.edges_.push_back(edges_[keep[i]]);
    }
    sub.out_.assign(num_vertices(), {});
    for (int d = 0; d < sub.num_directed(); ++d)
        sub.out_[sub.tail(d)].push_back(d);
    for (const auto& list : sub.out_)
        sub.max_degree_ = std::max(sub.max_degree_, static_cast<int>(list.size()));
    sub.crossing_partners_.assign(sub.num_edges(), {});
    for (const auto& [a, b] : crossings_) {
        if (position[a] < 0 || position[b] < 0)
            continue;
        const auto pa = position[a], pb = position[b];
        sub.crossings_.emplace_back(std::min(pa, pb), std::max(pa, pb));
        sub.crossing_partners_[pa].push_back(pb);
        sub.crossing_partners_[pb].push_back(pa);
    }
    std::sort(sub.crossings_.begin(), sub.crossings_.end());
    return sub;
}

int count_crossings(const PlanarGraph& graph)
{
    return static_cast<int>(graph.crossings().size());
}

int count_crossings(const PlanarGraph& graph, std::uint64_t edge_mask)
{
    int count = 0;
    for (const auto& [a, b] : graph.crossings())
        if (((edge_mask >> a) & 1u) && ((edge_mask >> b) & 1u))
            ++count;
    return count;
}

ModifiedGraph modify_graph(const PlanarGraph& graph, const Eigen::VectorXd& x, int e, int g)
{
    if (e < 0 || g < 0 || e >= graph.num_directed() || g >= graph.num_directed())
        throw Error(ErrorKind::invalid_edge, "modify_graph: directed edge out of range");
    if (x.size() != graph.num_edges())
        throw Error(ErrorKind::missing_weight, "modify_graph: weight vector size mismatch");

    const int ue = undirected(e), ug = undirected(g);
    std::vector<Point> vertices = graph.vertices();
    std::vector<std::array<int, 2>> edges;
    ModifiedGraph result;
    std::vector<double> weights;

    for (int k = 0; k < graph.num_edges(); ++k) {
        if (k == ue || k == ug)
            continue;
        edges.push_back(graph.edge(k));
        weights.push_back(x[k]);
        result.base_edge.push_back(k);
    }

    result.mid_in = static_cast<int>(vertices.size());
    vertices.push_back(graph.midpoint(e));
    if (ug == ue) {
        result.mid_out = result.mid_in;
    } else {
        result.mid_out = static_cast<int>(vertices.size());
        vertices.push_back(graph.midpoint(g));
    }

    result.half_in = static_cast<int>(edges.size());
    edges.push_back({result.mid_in, graph.head(e)});
    weights.push_back(x[ue]);
    result.base_edge.push_back(-1);

    if (g == reversed(e)) {
        result.half_out = result.half_in;
    } else {
        result.half_out = static_cast<int>(edges.size());
        edges.push_back({graph.tail(g), result.mid_out});
        weights.push_back(1.0);
        result.base_edge.push_back(-1);
    }

    result.graph = PlanarGraph(std::move(vertices), std::move(edges));
    result.weights = Eigen::Map<const Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
    return result;
}

} // namespace kacward
