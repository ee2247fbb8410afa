#ifndef KACWARD_SHOLO_HPP
#define KACWARD_SHOLO_HPP

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "kacward/isoradial.hpp"
#include "kacward/operator.hpp"

namespace kacward {

/// Orthogonal projection of w onto the real line through the unit complex number line.
inline std::complex<double> project(std::complex<double> w, std::complex<double> line)
{
    return line * (std::conj(line) * w).real();
}

/// Unit representative exp(-i/2 Arg(h(d) - t(d))) of the line attached to a directed edge.
std::complex<double> edge_line(const PlanarGraph& graph, int d);

/// The vector i_d of the standard basis of line-valued functions.
Eigen::VectorXcd line_basis_vector(const PlanarGraph& graph, int d);

/// Sf(d) = sin(theta_d / 2) Proj(f(d); l_d), from edge values to directed values.
Eigen::VectorXcd S_apply(const IsoradialLattice& lattice, const Eigen::VectorXcd& f);

/// S^-1 phi(k) = (sin(theta_k / 2))^-1 (phi(2k) + phi(2k + 1)); every phi(d) must lie on its line.
Eigen::VectorXcd S_inverse(const IsoradialLattice& lattice, const Eigen::VectorXcd& phi, double tol = 1e-9);

/// Two consecutive edges pointing at z (b counterclockwise after a) and the circumcentre of the face between them.
struct Corner
{
    int in_a;
    int in_b;
    Point dual;
};

/// Corners at z; only gaps below pi bound a face.
std::vector<Corner> corners(const IsoradialLattice& lattice, int z);

enum class Branch { principal, negated };

/// Unit representative of (z - dual)^(-1/2) R.
std::complex<double> corner_line(Point z, Point dual, Branch branch = Branch::principal);

struct CornerResidual
{
    int vertex;
    int corner;
    int in_a;
    int in_b;
    double residual;
};

struct SholomorphicityReport
{
    bool applicable = false;  // false at boundary vertices
    double max_residual = 0.0;
    std::vector<CornerResidual> corners;
};

SholomorphicityReport sholomorphicity_at(const IsoradialLattice& lattice, const Eigen::VectorXcd& f, int z,
                                         Branch branch = Branch::principal);

/// Throws not_applicable at boundary vertices.
bool is_sholomorphic_at(const IsoradialLattice& lattice, const Eigen::VectorXcd& f, int z, double tol);

struct KernelEquivalence
{
    double kernel_residual = 0.0;  // max |T S f| over edges pointing at z
    double shol_residual = 0.0;
    bool kernel_zero = false;
    bool sholomorphic = false;

    bool consistent() const { return kernel_zero == sholomorphic; }
};

/// Both sides of: T S f vanishes on In(z) iff f is s-holomorphic at z (critical weights).
KernelEquivalence kernel_equivalence_check(const IsoradialLattice& lattice, const SparseOperator<double>& t,
                                           const Eigen::VectorXcd& f, int z, double tol);

/**
 * The four equivalent forms of the corner condition between consecutive
 * incoming edges, as residuals (left minus right side):
 * the T S f relation, the expanded local relation, its critical rewriting,
 * and the projection form on the corner line.
 */
struct CornerForms
{
    std::complex<double> kernel;
    std::complex<double> local;
    std::complex<double> critical;
    std::complex<double> projection;
};

CornerForms corner_forms(const IsoradialLattice& lattice, const SparseOperator<double>& t,
                         const Eigen::VectorXcd& f, const Corner& corner);

/// f_e = S^-1 T^-1 i_{-e}.
Eigen::VectorXcd observable_column(const IsoradialLattice& lattice,
                                   const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu, int e);
Eigen::VectorXcd observable_column(const IsoradialLattice& lattice, const Eigen::MatrixXcd& inverse, int e);

} // namespace kacward

#endif // KACWARD_SHOLO_HPP
