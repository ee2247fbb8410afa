#include "kacward/sholo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace kacward {

namespace {

using cplx = std::complex<double>;

Point circumcentre(Point a, Point b, Point c)
{
    const Point p = b - a, q = c - a;
    const double d = 2 * (p.real() * q.imag() - p.imag() * q.real());
    const double pp = std::norm(p), qq = std::norm(q);
    return a + Point((q.imag() * pp - p.imag() * qq) / d, (p.real() * qq - q.real() * pp) / d);
}

void require_edge_function(const IsoradialLattice& lattice, const Eigen::VectorXcd& f)
{
    if (f.size() != lattice.graph.num_edges())
        throw Error(ErrorKind::invalid_argument, "edge function has the wrong size");
}

} // namespace

cplx edge_line(const PlanarGraph& graph, int d)
{
    return std::polar(1.0, -std::arg(graph.direction(d)) / 2);
}

Eigen::VectorXcd line_basis_vector(const PlanarGraph& graph, int d)
{
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(graph.num_directed());
    v[d] = edge_line(graph, d);
    return v;
}

Eigen::VectorXcd S_apply(const IsoradialLattice& lattice, const Eigen::VectorXcd& f)
{
    require_edge_function(lattice, f);
    const PlanarGraph& graph = lattice.graph;
    Eigen::VectorXcd phi(graph.num_directed());
    for (int d = 0; d < graph.num_directed(); ++d) {
        const int k = undirected(d);
        phi[d] = std::sin(lattice.theta[k] / 2) * project(f[k], edge_line(graph, d));
    }
    return phi;
}

Eigen::VectorXcd S_inverse(const IsoradialLattice& lattice, const Eigen::VectorXcd& phi, double tol)
{
    const PlanarGraph& graph = lattice.graph;
    if (phi.size() != graph.num_directed())
        throw Error(ErrorKind::invalid_argument, "directed function has the wrong size");
    for (int d = 0; d < graph.num_directed(); ++d) {
        const double off = std::abs((std::conj(edge_line(graph, d)) * phi[d]).imag());
        if (off > tol * std::max(1.0, std::abs(phi[d]))) {
            std::ostringstream os;
            os << "value on directed edge " << d << " is off its line by " << off;
            throw Error(ErrorKind::invalid_argument, os.str());
        }
    }
    Eigen::VectorXcd f(graph.num_edges());
    for (int k = 0; k < graph.num_edges(); ++k)
        f[k] = (phi[directed_of(k)] + phi[directed_of(k, true)]) / std::sin(lattice.theta[k] / 2);
    return f;
}

std::vector<Corner> corners(const IsoradialLattice& lattice, int z)
{
    const PlanarGraph& graph = lattice.graph;
    std::vector<std::pair<double, int>> around;
    for (int d : graph.out_edges(z))
        around.emplace_back(std::arg(graph.direction(d)), d);
    std::sort(around.begin(), around.end());
    std::vector<Corner> result;
    const std::size_t n = around.size();
    if (n < 2)
        return result;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& [angle_a, out_a] = around[i];
        const auto& [angle_b, out_b] = around[(i + 1) % n];
        const double gap = i + 1 < n ? angle_b - angle_a : angle_b + 2 * std::numbers::pi - angle_a;
        if (gap >= std::numbers::pi - 1e-12)
            continue;
        const Point dual = circumcentre(graph.vertex(z), graph.vertex(graph.head(out_a)), graph.vertex(graph.head(out_b)));
        result.push_back({reversed(out_a), reversed(out_b), dual});
    }
    return result;
}

cplx corner_line(Point z, Point dual, Branch branch)
{
    const cplx line = std::polar(1.0, -std::arg(z - dual) / 2);
    return branch == Branch::principal ? line : -line;
}

SholomorphicityReport sholomorphicity_at(const IsoradialLattice& lattice, const Eigen::VectorXcd& f, int z,
                                         Branch branch)
{
    require_edge_function(lattice, f);
    SholomorphicityReport report;
    if (!lattice.is_interior(z) || lattice.graph.degree(z) == 0)
        return report;
    report.applicable = true;
    const Point at = lattice.graph.vertex(z);
    int index = 0;
    for (const Corner& corner : corners(lattice, z)) {
        const cplx line = corner_line(at, corner.dual, branch);
        const double residual = std::abs(project(f[undirected(corner.in_a)], line) -
                                         project(f[undirected(corner.in_b)], line));
        report.corners.push_back({z, index++, corner.in_a, corner.in_b, residual});
        report.max_residual = std::max(report.max_residual, residual);
    }
    return report;
}

bool is_sholomorphic_at(const IsoradialLattice& lattice, const Eigen::VectorXcd& f, int z, double tol)
{
    const SholomorphicityReport report = sholomorphicity_at(lattice, f, z);
    if (!report.applicable) {
        std::ostringstream os;
        os << "s-holomorphicity is not defined at boundary vertex " << z;
        throw Error(ErrorKind::not_applicable, os.str());
    }
    return report.max_residual < tol;
}

KernelEquivalence kernel_equivalence_check(const IsoradialLattice& lattice, const SparseOperator<double>& t,
                                           const Eigen::VectorXcd& f, int z, double tol)
{
    const SholomorphicityReport report = sholomorphicity_at(lattice, f, z);
    if (!report.applicable)
        throw Error(ErrorKind::not_applicable, "kernel equivalence needs an interior vertex");
    const Eigen::VectorXcd image = t * S_apply(lattice, f);
    KernelEquivalence check;
    for (int d : lattice.graph.out_edges(z))
        check.kernel_residual = std::max(check.kernel_residual, std::abs(image[reversed(d)]));
    check.shol_residual = report.max_residual;
    check.kernel_zero = check.kernel_residual < tol;
    check.sholomorphic = check.shol_residual < tol;
    return check;
}

CornerForms corner_forms(const IsoradialLattice& lattice, const SparseOperator<double>& t,
                         const Eigen::VectorXcd& f, const Corner& corner)
{
    const PlanarGraph& graph = lattice.graph;
    const Eigen::VectorXcd sf = S_apply(lattice, f);
    const Eigen::VectorXcd tsf = t * sf;
    const int e1 = corner.in_a, e2 = corner.in_b;
    const double th1 = lattice.theta[undirected(e1)], th2 = lattice.theta[undirected(e2)];
    const double x1 = std::tan(th1 / 2), x2 = std::tan(th2 / 2);
    const double s1 = std::sin(th1 / 2), c1 = std::cos(th1 / 2);
    const double s2 = std::sin(th2 / 2), c2 = std::cos(th2 / 2);
    const cplx turn = std::polar(1.0, turning_angle(graph, e1, e2) / 2);
    const cplx i(0.0, 1.0);

    CornerForms forms;
    forms.kernel = tsf[e1] / x1 - turn * tsf[e2] / x2;
    forms.local = sf[e1] / x1 + i * sf[reversed(e1)] - turn * (sf[e2] / x2 - i * sf[reversed(e2)]);
    forms.critical = std::polar(1.0 / s1, -th1 / 2) * (sf[e1] * c1 + i * sf[reversed(e1)] * s1) -
                     std::polar(1.0 / s2, th2 / 2) * (sf[e2] * c2 - i * sf[reversed(e2)] * s2);
    const cplx line = std::polar(1.0, -th1 / 2) * edge_line(graph, e1);
    forms.projection = project(f[undirected(e1)], line) - project(f[undirected(e2)], line);
    return forms;
}

Eigen::VectorXcd observable_column(const IsoradialLattice& lattice,
                                   const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu, int e)
{
    const Eigen::VectorXcd phi = lu.solve(line_basis_vector(lattice.graph, reversed(e)));
    return S_inverse(lattice, phi);
}

Eigen::VectorXcd observable_column(const IsoradialLattice& lattice, const Eigen::MatrixXcd& inverse, int e)
{
    const Eigen::VectorXcd phi = inverse * line_basis_vector(lattice.graph, reversed(e));
    return S_inverse(lattice, phi);
}

} // namespace kacward
