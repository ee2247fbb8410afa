#ifndef KACWARD_SPECTRAL_HPP
#define KACWARD_SPECTRAL_HPP

#include <vector>

#include <Eigen/Dense>

#include "kacward/isoradial.hpp"
#include "kacward/operator.hpp"

namespace kacward {

/// Per-directed-edge scaling sqrt(x) of the conjugation.
Eigen::VectorXd conjugation_scaling(const PlanarGraph& graph, const Eigen::VectorXd& x);

/// B = D^-1 Lambda D with D = diag(sqrt(x_e)) over directed edges.
Eigen::MatrixXcd conjugated_matrix(const PlanarGraph& graph, const SparseOperator<double>& lambda,
                                   const Eigen::VectorXd& x);

/// Largest singular value.
double operator_norm(const Eigen::MatrixXcd& a);

struct EpsilonBound
{
    double epsilon = 1.0;   // max over edges of tanh(beta J) / tanh(J)
    double envelope = 1.0;  // sup over j in [m, M] of tanh(beta j) / tanh(j)
    double m = 0.0;         // tanh m = tan(k / 2)
    double M = 0.0;         // tanh M = tan(K / 2)
};

/// Returns epsilon = 1 at beta = 1.
EpsilonBound epsilon_bound(const IsoradialLattice& lattice, double beta);

struct SpectralRadius
{
    double eigen = 0.0;       // max |eigenvalue| of a dense eigensolve
    double gelfand16 = 0.0;   // ||A^16||^(1/16)
    double gelfand32 = 0.0;   // ||A^32||^(1/32)
};

SpectralRadius spectral_radius(const Eigen::MatrixXcd& a);
SpectralRadius spectral_radius(const SparseOperator<double>& lambda);

/**
 * The unique s > 0 with sum over Out(z) of arctan(xhat_e^2 / s) = pi / 2,
 * by bisection. Zero at vertices of degree at most one.
 */
double xi(const PlanarGraph& graph, int z, const Eigen::VectorXd& xhat);

/// xhat_e = sqrt(tan(theta_e / 2)) on both orientations.
Eigen::VectorXd initial_directed_weights(const IsoradialLattice& lattice);

struct Certificate
{
    Eigen::VectorXd xhat;                  // per directed edge
    std::vector<double> xi_initial;        // per vertex, before any perturbation
    std::vector<double> xi;                // per vertex, final
    std::vector<std::vector<int>> shells;  // shells[r] = V_r minus V_{r-1}
    double factorization_error = 0.0;      // max |xhat_e xhat_{-e} - tan(theta_e / 2)|

    double max_xi() const;
    bool certified() const { return max_xi() < 1.0; }
};

/**
 * Directed weights with xhat_e xhat_{-e} = tan(theta_e / 2) and xi_z < 1 at
 * every vertex, built shell by shell outwards from the vertices missing
 * lattice neighbours. Throws not_applicable when no such vertex exists.
 */
Certificate criticality_certificate(const IsoradialLattice& lattice);

struct DecayRow
{
    int r;
    double max_entry;  // max |(Lambda^r)_{e,g}|
    double bound;      // C epsilon^r
    double chain;      // ||D|| ||D^-1|| ||B||^r
};

struct DistanceRow
{
    int distance;
    double max_entry;  // max |T^-1_{e,g}| over pairs at this walk distance
};

struct DecayProfile
{
    double beta = 0.0;
    double C = 1.0;  // ||D|| ||D^-1||
    EpsilonBound epsilon;
    double norm_B = 0.0;
    std::vector<DecayRow> rows;
    double slope = 0.0;  // least squares of log max_entry against r, r >= fit_from
    double intercept = 0.0;
    std::vector<DistanceRow> inverse_rows;
    double inverse_slope = 0.0;  // same fit for the inverse against distance
    int fit_from = 4;

    bool all_under_bound() const;
};

DecayProfile decay_profile(const IsoradialLattice& lattice, double beta, int r_max, int threads = 1);

/// Slope and intercept of the least-squares line through (t, log y) for t >= from.
std::pair<double, double> log_linear_fit(const std::vector<std::pair<double, double>>& points, double from);

struct NoninvertibilityReport
{
    LatticeKind kind = LatticeKind::square;
    int radius = 0;
    int support_edges = 0;   // |H|
    int boundary_edges = 0;  // |H_0|: edges where T phi does not vanish
    double ratio = 0.0;      // ||T phi|| / ||phi||
    double t_phi_sup = 0.0;  // ||T phi||_inf
    double sup_bound = 0.0;  // tan(K / 2) Delta
    double phi_norm = 0.0;
    double norm_lower = 0.0;  // sin(k / 2) sqrt(|H|)

    bool sup_bound_holds() const { return t_phi_sup <= sup_bound; }
    /// The lower bound is attained exactly on uniform lattices, hence the relative slack.
    bool norm_bound_holds() const { return phi_norm >= norm_lower * (1.0 - 1e-12); }
};

/**
 * phi = S 1_H for the subgraph H induced by lattice vertices in [-r, r]^2,
 * with T taken on a patch large enough to contain every edge that meets H.
 */
NoninvertibilityReport noninvertibility_ratio(LatticeKind kind, int radius);

} // namespace kacward

#endif // KACWARD_SPECTRAL_HPP
