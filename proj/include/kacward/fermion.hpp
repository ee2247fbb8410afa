#ifndef KACWARD_FERMION_HPP
#define KACWARD_FERMION_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "kacward/geometry.hpp"
#include "kacward/walks.hpp"

namespace kacward {

/**
 * A member H of fE(e, g): both half-edges plus the edges of G \ {e, g}
 * selected by mask, with every vertex of G of even degree in H.
 */
struct FermionConfig
{
    std::uint64_t mask = 0;
    std::vector<int> path;  // left-most path, as a walk e, ..., g of G
    double winding = 0.0;
    double monomial = 1.0;  // x_e times the weights of the masked edges; the half-edge of g weighs 1
};

/// True when the edges in mask together with the half-edges of e and g form a member of fE(e, g).
bool in_fermion_family(const PlanarGraph& graph, int e, int g, std::uint64_t mask);

/**
 * The path through H from (m(e), h(e)) to (t(g), m(g)) that always turns
 * into the unvisited edge with the largest turning angle.
 */
std::vector<int> leftmost_path(const PlanarGraph& graph, int e, int g, std::uint64_t mask);

/// All of fE(e, g); empty for g = -e or when h(e) and t(g) are disconnected in G \ {e, g}.
std::vector<FermionConfig> enumerate_fE(const PlanarGraph& graph, const Eigen::VectorXd& x, int e, int g,
                                        int cap = kCycleSpaceCap);

/// F_{e,g} = delta_{e,g} + (1/Z) sum over fE(e, g) of exp(-i alpha / 2) prod x.
std::complex<double> fermionic_F(const PlanarGraph& graph, const Eigen::VectorXd& x, int e, int g, double Z,
                                 int cap = kCycleSpaceCap);
std::complex<double> fermionic_F(const PlanarGraph& graph, const Eigen::VectorXd& x, int e, int g,
                                 int cap = kCycleSpaceCap);

/// F over all pairs of directed edges.
Eigen::MatrixXcd fermion_matrix(const PlanarGraph& graph, const Eigen::VectorXd& x, int cap = kCycleSpaceCap);

/// (cos(theta_g / 2))^-1 (F_{e,g} + F_{e,-g}) for the undirected edge g.
std::complex<double> symmetrized_observable(const Eigen::MatrixXcd& F, int e, int g_undirected,
                                            const Eigen::VectorXd& theta);

/**
 * Closing a configuration into a closed path with the segment from m(g) to
 * m(e). If that segment meets a vertex or runs along an edge, a two-segment
 * detour through a point off the segment is used instead.
 */
struct ClosingSign
{
    int crossings = 0;             // C(H with the closing curve)
    std::complex<double> phase;    // -exp(i/2 (alpha + closing turns))
    double error = 0.0;            // |phase - (-1)^crossings|
    bool detour = false;
};

ClosingSign closing_sign(const PlanarGraph& graph, int e, int g, const FermionConfig& config);

} // namespace kacward

#endif // KACWARD_FERMION_HPP
