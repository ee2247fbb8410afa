#include "kacward/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <tuple>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "kacward/sholo.hpp"

namespace kacward {

namespace {

double sup_ratio(double beta, double j)
{
    return j == 0.0 ? beta : std::tanh(beta * j) / std::tanh(j);
}

// Breadth-first distance of every vertex to the set of sources.
std::vector<int> vertex_distances(const PlanarGraph& graph, const std::vector<int>& sources)
{
    std::vector<int> dist(graph.num_vertices(), kUnreachable);
    std::deque<int> queue;
    for (int v : sources) {
        dist[v] = 0;
        queue.push_back(v);
    }
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        for (int d : graph.out_edges(v)) {
            const int w = graph.head(d);
            if (dist[w] == kUnreachable) {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    return dist;
}

} // namespace

Eigen::VectorXd conjugation_scaling(const PlanarGraph& graph, const Eigen::VectorXd& x)
{
    if (x.size() != graph.num_edges())
        throw Error(ErrorKind::missing_weight, "one weight per edge is required");
    Eigen::VectorXd d(graph.num_directed());
    for (int e = 0; e < graph.num_directed(); ++e) {
        const double w = x[undirected(e)];
        if (!(w > 0.0))
            throw Error(ErrorKind::invalid_argument, "conjugation needs positive weights");
        d[e] = std::sqrt(w);
    }
    return d;
}

Eigen::MatrixXcd conjugated_matrix(const PlanarGraph& graph, const SparseOperator<double>& lambda,
                                   const Eigen::VectorXd& x)
{
    const Eigen::VectorXd d = conjugation_scaling(graph, x);
    const Eigen::MatrixXcd dense(lambda);
    return d.cwiseInverse().asDiagonal() * dense * d.asDiagonal();
}

double operator_norm(const Eigen::MatrixXcd& a)
{
    if (a.size() == 0)
        return 0.0;
    const Eigen::BDCSVD<Eigen::MatrixXcd> svd(a);
    return svd.singularValues()(0);
}

EpsilonBound epsilon_bound(const IsoradialLattice& lattice, double beta)
{
    if (!(beta > 0.0 && beta <= 1.0))
        throw Error(ErrorKind::invalid_argument, "beta must lie in (0, 1]");
    EpsilonBound bound;
    bound.m = std::atanh(std::tan(lattice.k_bound / 2));
    bound.M = lattice.K_bound < std::numbers::pi / 2 ? std::atanh(std::tan(lattice.K_bound / 2))
                                                     : std::numeric_limits<double>::infinity();
    if (beta == 1.0)
        return bound;

    const IsingWeights w = weights(lattice, beta);
    bound.epsilon = 0.0;
    for (Eigen::Index k = 0; k < w.x.size(); ++k)
        bound.epsilon = std::max(bound.epsilon, w.x[k] / std::tan(lattice.theta[k] / 2));

    bound.envelope = std::max(sup_ratio(beta, bound.m), sup_ratio(beta, bound.M));
    constexpr int samples = 2048;
    for (int i = 1; i < samples; ++i) {
        const double j = bound.m + (bound.M - bound.m) * i / samples;
        bound.envelope = std::max(bound.envelope, sup_ratio(beta, j));
    }
    return bound;
}

SpectralRadius spectral_radius(const Eigen::MatrixXcd& a)
{
    SpectralRadius rho;
    if (a.size() == 0)
        return rho;
    const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(a, false);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorKind::singular_operator, "eigensolver did not converge");
    rho.eigen = solver.eigenvalues().cwiseAbs().maxCoeff();
    Eigen::MatrixXcd power = a;
    for (int n = 2; n <= 32; ++n) {
        power = power * a;
        if (n == 16)
            rho.gelfand16 = std::pow(operator_norm(power), 1.0 / 16);
    }
    rho.gelfand32 = std::pow(operator_norm(power), 1.0 / 32);
    return rho;
}

SpectralRadius spectral_radius(const SparseOperator<double>& lambda)
{
    return spectral_radius(Eigen::MatrixXcd(lambda));
}

double xi(const PlanarGraph& graph, int z, const Eigen::VectorXd& xhat)
{
    if (xhat.size() != graph.num_directed())
        throw Error(ErrorKind::missing_weight, "one weight per directed edge is required");
    const auto& out = graph.out_edges(z);
    if (out.size() <= 1)
        return 0.0;
    double total = 0.0;
    for (int d : out)
        total += xhat[d] * xhat[d];
    auto excess = [&](double s) {
        double sum = 0.0;
        for (int d : out)
            sum += std::atan(xhat[d] * xhat[d] / s);
        return sum - std::numbers::pi / 2;
    };
    double lo = 0.0, hi = total;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        (excess(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Eigen::VectorXd initial_directed_weights(const IsoradialLattice& lattice)
{
    Eigen::VectorXd xhat(lattice.graph.num_directed());
    for (int d = 0; d < xhat.size(); ++d)
        xhat[d] = std::sqrt(std::tan(lattice.theta[undirected(d)] / 2));
    return xhat;
}

double Certificate::max_xi() const
{
    return xi.empty() ? 0.0 : *std::max_element(xi.begin(), xi.end());
}

Certificate criticality_certificate(const IsoradialLattice& lattice)
{
    const PlanarGraph& graph = lattice.graph;
    std::vector<int> deficient;
    for (int v = 0; v < graph.num_vertices(); ++v)
        if (!lattice.is_interior(v))
            deficient.push_back(v);
    if (deficient.empty())
        throw Error(ErrorKind::not_applicable, "no vertex misses a lattice neighbour; no certificate exists");
    const std::vector<int> dist = vertex_distances(graph, deficient);
    int depth = 0;
    for (int v = 0; v < graph.num_vertices(); ++v) {
        if (dist[v] == kUnreachable)
            throw Error(ErrorKind::not_applicable, "a component has no deficient vertex; no certificate exists");
        depth = std::max(depth, dist[v]);
    }

    Certificate cert;
    cert.shells.assign(depth + 1, {});
    for (int v = 0; v < graph.num_vertices(); ++v)
        cert.shells[dist[v]].push_back(v);
    cert.xhat = initial_directed_weights(lattice);
    for (int v = 0; v < graph.num_vertices(); ++v)
        cert.xi_initial.push_back(xi(graph, v, cert.xhat));

    constexpr double delta_max = 1.0;
    for (int r = 1; r <= depth; ++r) {
        for (int z : cert.shells[r]) {
            int toward = -1;  // directed edge (w, z) with w one shell closer
            for (int d : graph.out_edges(z))
                if (dist[graph.head(d)] == r - 1) {
                    toward = reversed(d);
                    break;
                }
            const int w = graph.tail(toward);
            const double xi_w = xi(graph, w, cert.xhat);
            const double limit = 1.0 - std::min(1e-3, (1.0 - xi_w) / 2);
            const double forward = cert.xhat[toward], backward = cert.xhat[reversed(toward)];
            auto xi_after = [&](double delta) {
                Eigen::VectorXd trial = cert.xhat;
                trial[toward] = forward * (1 + delta);
                return xi(graph, w, trial);
            };
            double delta = delta_max;
            if (xi_after(delta_max) > limit) {
                double lo = 0.0, hi = delta_max;
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (xi_after(mid) <= limit ? lo : hi) = mid;
                }
                delta = lo;
            }
            cert.xhat[toward] = forward * (1 + delta);
            cert.xhat[reversed(toward)] = backward / (1 + delta);
        }
    }

    for (int v = 0; v < graph.num_vertices(); ++v)
        cert.xi.push_back(xi(graph, v, cert.xhat));
    for (int k = 0; k < graph.num_edges(); ++k) {
        const double product = cert.xhat[directed_of(k)] * cert.xhat[directed_of(k, true)];
        cert.factorization_error =
            std::max(cert.factorization_error, std::abs(product - std::tan(lattice.theta[k] / 2)));
    }
    return cert;
}

bool DecayProfile::all_under_bound() const
{
    return std::all_of(rows.begin(), rows.end(), [](const DecayRow& row) { return row.max_entry <= row.bound; });
}

std::pair<double, double> log_linear_fit(const std::vector<std::pair<double, double>>& points, double from)
{
    double n = 0, st = 0, sy = 0, stt = 0, sty = 0;
    for (const auto& [t, y] : points) {
        if (t < from || !(y > 0.0))
            continue;
        const double ly = std::log(y);
        n += 1;
        st += t;
        sy += ly;
        stt += t * t;
        sty += t * ly;
    }
    if (n < 2)
        throw Error(ErrorKind::invalid_argument, "log-linear fit needs at least two positive points");
    const double slope = (n * sty - st * sy) / (n * stt - st * st);
    return {slope, (sy - slope * st) / n};
}

DecayProfile decay_profile(const IsoradialLattice& lattice, double beta, int r_max, int threads)
{
    if (r_max < 6)
        throw Error(ErrorKind::invalid_argument, "decay profile needs r_max >= 6");
    const PlanarGraph& graph = lattice.graph;
    const Eigen::VectorXd x = weights(lattice, beta).x;
    const SparseOperator<double> lambda = transition_matrix<double>(graph, x);
    const Eigen::VectorXd d = conjugation_scaling(graph, x);

    DecayProfile profile;
    profile.beta = beta;
    profile.epsilon = epsilon_bound(lattice, beta);
    profile.C = d.maxCoeff() / d.minCoeff();
    profile.norm_B = operator_norm(conjugated_matrix(graph, lambda, x));

    const Eigen::Index n = lambda.rows();
    Eigen::MatrixXcd power = Eigen::MatrixXcd::Identity(n, n);
    std::vector<std::pair<double, double>> points;
    for (int r = 0; r <= r_max; ++r) {
        if (r > 0) {
            Eigen::MatrixXcd next = power * lambda;
            power = std::move(next);
        }
        const double entry = power.cwiseAbs().maxCoeff();
        profile.rows.push_back({r, entry, profile.C * std::pow(profile.epsilon.epsilon, r),
                                profile.C * std::pow(profile.norm_B, r)});
        points.emplace_back(r, entry);
    }
    std::tie(profile.slope, profile.intercept) = log_linear_fit(points, profile.fit_from);

    const Eigen::MatrixXcd inverse = invert<double>(kac_ward_operator<double>(lambda), threads).matrix;
    std::vector<double> by_distance;
    for (int e = 0; e < n; ++e) {
        const std::vector<int> dist = distances_from(graph, e);
        for (int g = 0; g < n; ++g) {
            if (dist[g] == kUnreachable)
                continue;
            if (dist[g] >= static_cast<int>(by_distance.size()))
                by_distance.resize(dist[g] + 1, 0.0);
            by_distance[dist[g]] = std::max(by_distance[dist[g]], std::abs(inverse(e, g)));
        }
    }
    std::vector<std::pair<double, double>> inverse_points;
    for (int k = 0; k < static_cast<int>(by_distance.size()); ++k) {
        profile.inverse_rows.push_back({k, by_distance[k]});
        inverse_points.emplace_back(k, by_distance[k]);
    }
    profile.inverse_slope = log_linear_fit(inverse_points, profile.fit_from).first;
    return profile;
}

NoninvertibilityReport noninvertibility_ratio(LatticeKind kind, int radius)
{
    if (radius < 1)
        throw Error(ErrorKind::invalid_argument, "box radius must be at least 1");
    // Patch radius reaching one edge beyond the square [-r, r]^2.
    const double reach = radius * std::numbers::sqrt2 + 1.0;
    int patch = radius + 1;
    if (kind == LatticeKind::triangular)
        patch = static_cast<int>(std::ceil(reach * 2 / std::sqrt(3.0))) + 1;
    else if (kind == LatticeKind::hexagonal)
        patch = static_cast<int>(std::ceil((reach + 1.0) / 1.5)) + 2;
    const IsoradialLattice lattice = build_lattice(kind, patch);
    const PlanarGraph& graph = lattice.graph;

    const double box = radius + kGeometricTolerance;
    auto inside = [&](int v) {
        const Point p = graph.vertex(v);
        return std::abs(p.real()) <= box && std::abs(p.imag()) <= box;
    };
    Eigen::VectorXcd f = Eigen::VectorXcd::Zero(graph.num_edges());
    NoninvertibilityReport report;
    report.kind = kind;
    report.radius = radius;
    for (int k = 0; k < graph.num_edges(); ++k)
        if (inside(graph.edge(k)[0]) && inside(graph.edge(k)[1])) {
            f[k] = 1.0;
            ++report.support_edges;
        }

    const Eigen::VectorXcd phi = S_apply(lattice, f);
    const Eigen::VectorXcd image = kac_ward_operator<double>(graph, critical_weights(lattice)) * phi;
    for (int k = 0; k < graph.num_edges(); ++k)
        if (std::max(std::abs(image[directed_of(k)]), std::abs(image[directed_of(k, true)])) > 1e-12)
            ++report.boundary_edges;
    report.phi_norm = phi.norm();
    report.ratio = report.phi_norm > 0.0 ? image.norm() / report.phi_norm : 0.0;
    report.t_phi_sup = image.cwiseAbs().maxCoeff();
    report.sup_bound = std::tan(lattice.K_bound / 2) * lattice.lattice_max_degree();
    report.norm_lower = std::sin(lattice.k_bound / 2) * std::sqrt(static_cast<double>(report.support_edges));
    return report;
}

} // namespace kacward
