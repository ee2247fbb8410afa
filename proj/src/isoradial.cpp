#include "kacward/isoradial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace kacward {

namespace {

constexpr double kAngleTolerance = 1e-9;

// Deduplicates generated points by rounding to a fine grid.
class PointSet
{
public:
    int insert(Point p)
    {
        const auto key = std::make_pair(std::llround(p.real() * 1e6), std::llround(p.imag() * 1e6));
        auto [it, fresh] = index_.emplace(key, static_cast<int>(points_.size()));
        if (fresh)
            points_.push_back(p);
        return it->second;
    }

    std::vector<Point>& points() { return points_; }

private:
    std::map<std::pair<long long, long long>, int> index_;
    std::vector<Point> points_;
};

IsoradialLattice finish(std::vector<Point> vertices, std::vector<std::array<int, 2>> edges,
                        double theta, int degree, double circumradius)
{
    IsoradialLattice lattice;
    lattice.graph = PlanarGraph(std::move(vertices), std::move(edges));
    lattice.theta = Eigen::VectorXd::Constant(lattice.graph.num_edges(), theta);
    lattice.full_degree.assign(lattice.graph.num_vertices(), degree);
    lattice.circumradius = circumradius;
    lattice.k_bound = theta;
    lattice.K_bound = theta;
    return lattice;
}

void require_radius(int radius)
{
    if (radius < 1)
        throw Error(ErrorKind::invalid_argument, "box radius must be at least 1");
}

} // namespace

LatticeKind parse_lattice_kind(const std::string& name)
{
    if (name == "square")
        return LatticeKind::square;
    if (name == "tri" || name == "triangular")
        return LatticeKind::triangular;
    if (name == "hex" || name == "hexagonal")
        return LatticeKind::hexagonal;
    throw Error(ErrorKind::invalid_argument, "unknown lattice kind '" + name + "'");
}

std::string to_string(LatticeKind kind)
{
    switch (kind) {
    case LatticeKind::square: return "square";
    case LatticeKind::triangular: return "tri";
    case LatticeKind::hexagonal: return "hex";
    }
    return "?";
}

int IsoradialLattice::lattice_max_degree() const
{
    return full_degree.empty() ? 0 : *std::max_element(full_degree.begin(), full_degree.end());
}

IsoradialLattice build_square_box(int nx, int ny)
{
    if (nx < 2 || ny < 1 || (nx == 1 && ny == 1))
        throw Error(ErrorKind::invalid_argument, "square box needs at least two vertices");
    std::vector<Point> vertices;
    std::vector<std::array<int, 2>> edges;
    auto id = [nx](int i, int j) { return j * nx + i; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            vertices.emplace_back(i, j);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            if (i + 1 < nx)
                edges.push_back({id(i, j), id(i + 1, j)});
            if (j + 1 < ny)
                edges.push_back({id(i, j), id(i, j + 1)});
        }
    return finish(std::move(vertices), std::move(edges), std::numbers::pi / 4, 4, std::numbers::sqrt2 / 2);
}

IsoradialLattice build_square(int radius)
{
    require_radius(radius);
    IsoradialLattice box = build_square_box(2 * radius + 1, 2 * radius + 1);
    std::vector<Point> shifted = box.graph.vertices();
    for (Point& p : shifted)
        p -= Point(radius, radius);
    box.graph = PlanarGraph(std::move(shifted), box.graph.edges());
    return box;
}

IsoradialLattice build_triangular(int radius)
{
    require_radius(radius);
    const Point a1(1.0, 0.0), a2(0.5, std::sqrt(3.0) / 2);
    auto inside = [radius](int i, int j) {
        return std::abs(i) <= radius && std::abs(j) <= radius && std::abs(i + j) <= radius;
    };
    std::map<std::pair<int, int>, int> index;
    std::vector<Point> vertices;
    for (int j = -radius; j <= radius; ++j)
        for (int i = -radius; i <= radius; ++i)
            if (inside(i, j)) {
                index[{i, j}] = static_cast<int>(vertices.size());
                vertices.push_back(double(i) * a1 + double(j) * a2);
            }
    std::vector<std::array<int, 2>> edges;
    const int offsets[3][2] = {{1, 0}, {0, 1}, {-1, 1}};
    for (int j = -radius; j <= radius; ++j)
        for (int i = -radius; i <= radius; ++i) {
            if (!inside(i, j))
                continue;
            for (const auto& o : offsets)
                if (inside(i + o[0], j + o[1]))
                    edges.push_back({index[{i, j}], index[{i + o[0], j + o[1]}]});
        }
    return finish(std::move(vertices), std::move(edges), std::numbers::pi / 6, 6, 1.0 / std::sqrt(3.0));
}

IsoradialLattice build_hexagonal(int radius)
{
    require_radius(radius);
    const double s3 = std::sqrt(3.0);
    const Point a1(s3, 0.0), a2(s3 / 2, 1.5);
    PointSet points;
    std::map<std::pair<int, int>, bool> seen;
    std::vector<std::array<int, 2>> edges;
    const int r = radius - 1;
    for (int j = -r; j <= r; ++j)
        for (int i = -r; i <= r; ++i) {
            if (std::abs(i + j) > r)
                continue;
            const Point centre = double(i) * a1 + double(j) * a2;
            int corner[6];
            for (int k = 0; k < 6; ++k)
                corner[k] = points.insert(centre + std::polar(1.0, std::numbers::pi / 6 + k * std::numbers::pi / 3));
            for (int k = 0; k < 6; ++k) {
                int u = corner[k], v = corner[(k + 1) % 6];
                if (u > v)
                    std::swap(u, v);
                if (seen.emplace(std::make_pair(u, v), true).second)
                    edges.push_back({u, v});
            }
        }
    return finish(std::move(points.points()), std::move(edges), std::numbers::pi / 3, 3, 1.0);
}

IsoradialLattice build_lattice(LatticeKind kind, int radius)
{
    switch (kind) {
    case LatticeKind::square: return build_square(radius);
    case LatticeKind::triangular: return build_triangular(radius);
    case LatticeKind::hexagonal: return build_hexagonal(radius);
    }
    throw Error(ErrorKind::invalid_argument, "unknown lattice kind");
}

IsoradialLattice from_rhombic_data(std::vector<Point> vertices,
                                   std::vector<std::array<int, 2>> edges,
                                   std::vector<double> theta,
                                   std::optional<double> circumradius)
{
    if (theta.size() != edges.size())
        throw Error(ErrorKind::invalid_isoradial, "one theta per edge is required");
    for (std::size_t k = 0; k < theta.size(); ++k)
        if (!(theta[k] > 0.0 && theta[k] < std::numbers::pi)) {
            std::ostringstream os;
            os << "theta of edge " << k << " is outside (0, pi)";
            throw Error(ErrorKind::invalid_isoradial, os.str());
        }

    IsoradialLattice lattice;
    lattice.graph = PlanarGraph(std::move(vertices), std::move(edges));
    lattice.theta = Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
    lattice.full_degree.resize(lattice.graph.num_vertices());

    const PlanarGraph& g = lattice.graph;
    for (int v = 0; v < g.num_vertices(); ++v) {
        std::vector<double> angles;
        double sum = 0.0;
        for (int d : g.out_edges(v)) {
            angles.push_back(std::arg(g.direction(d)));
            sum += lattice.theta[undirected(d)];
        }
        std::sort(angles.begin(), angles.end());
        bool surrounded = angles.size() >= 3;
        for (std::size_t i = 0; surrounded && i < angles.size(); ++i) {
            const double next = i + 1 < angles.size() ? angles[i + 1] : angles[0] + 2 * std::numbers::pi;
            if (next - angles[i] >= std::numbers::pi - kAngleTolerance)
                surrounded = false;
        }
        const bool bad = surrounded ? std::abs(sum - std::numbers::pi) > kAngleTolerance
                                    : sum > std::numbers::pi + kAngleTolerance;
        if (bad) {
            std::ostringstream os;
            os << "rhombus angles at vertex " << v << " sum to " << sum << " instead of pi";
            throw Error(ErrorKind::invalid_isoradial, os.str());
        }
        lattice.full_degree[v] = g.degree(v) + (surrounded ? 0 : 1);
    }

    if (!theta.empty()) {
        lattice.k_bound = lattice.theta.minCoeff();
        lattice.K_bound = lattice.theta.maxCoeff();
    }
    if (circumradius) {
        lattice.circumradius = *circumradius;
    } else if (g.num_edges() > 0) {
        // Edge k is a rhombus diagonal: |e| = 2 R cos(theta_e).
        lattice.circumradius = std::abs(g.direction(0)) / (2 * std::cos(lattice.theta[0]));
    }
    return lattice;
}

IsoradialLattice subgraph(const IsoradialLattice& lattice, std::span<const int> keep)
{
    IsoradialLattice sub;
    sub.graph = lattice.graph.subgraph(keep);
    sub.theta.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i)
        sub.theta[static_cast<Eigen::Index>(i)] = lattice.theta[keep[i]];
    sub.full_degree = lattice.full_degree;
    sub.circumradius = lattice.circumradius;
    sub.k_bound = lattice.k_bound;
    sub.K_bound = lattice.K_bound;
    return sub;
}

double max_angle_sum_defect(const IsoradialLattice& lattice)
{
    const PlanarGraph& g = lattice.graph;
    double worst = 0.0;
    for (int v = 0; v < g.num_vertices(); ++v) {
        if (!lattice.is_interior(v) || g.degree(v) == 0)
            continue;
        double sum = 0.0;
        for (int d : g.out_edges(v))
            sum += lattice.theta[undirected(d)];
        worst = std::max(worst, std::abs(sum - std::numbers::pi));
    }
    return worst;
}

IsingWeights weights(const IsoradialLattice& lattice, double beta)
{
    if (!(beta > 0.0 && beta <= 1.0))
        throw Error(ErrorKind::invalid_argument, "inverse temperature must lie in (0, 1]");
    const Eigen::Index m = lattice.theta.size();
    IsingWeights w;
    w.beta = beta;
    w.J.resize(m);
    w.x.resize(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const double t = std::tan(lattice.theta[k] / 2);
        if (t >= 1.0) {
            if (beta < 1.0) {
                std::ostringstream os;
                os << "coupling of edge " << k << " is undefined (theta >= pi/2)";
                throw Error(ErrorKind::coupling_undefined, os.str());
            }
            w.J[k] = std::numeric_limits<double>::infinity();
        } else {
            w.J[k] = std::atanh(t);
        }
        w.x[k] = beta == 1.0 ? t : std::tanh(beta * w.J[k]);
    }
    return w;
}

Eigen::VectorXd critical_weights(const IsoradialLattice& lattice)
{
    return (lattice.theta.array() / 2).tan().matrix();
}

} // namespace kacward
