#ifndef KACWARD_ISORADIAL_HPP
#define KACWARD_ISORADIAL_HPP

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kacward/geometry.hpp"

namespace kacward {

enum class LatticeKind { square, triangular, hexagonal };

LatticeKind parse_lattice_kind(const std::string& name);
std::string to_string(LatticeKind kind);

/**
 * A finite region of an isoradial graph.
 *
 * theta[k] is the half-angle of the rhombus around edge k. full_degree[v] is
 * the degree of v in the ambient lattice; vertices whose degree in graph is
 * smaller are boundary (deficient) vertices, the rest are interior and carry
 * rhombus angles summing to pi.
 */
struct IsoradialLattice
{
    PlanarGraph graph;
    Eigen::VectorXd theta;
    std::vector<int> full_degree;
    double circumradius = 1.0;
    double k_bound = 0.0;
    double K_bound = 0.0;

    bool is_interior(int v) const { return graph.degree(v) == full_degree[v]; }
    int lattice_max_degree() const;
};

/// Square lattice on {(i, j) : |i|, |j| <= radius}, unit edges, theta = pi/4.
IsoradialLattice build_square(int radius);

/// Square lattice on the nx-by-ny vertex grid {0..nx-1} x {0..ny-1}.
IsoradialLattice build_square_box(int nx, int ny);

/// Triangular lattice patch max(|i|, |j|, |i + j|) <= radius, theta = pi/6.
IsoradialLattice build_triangular(int radius);

/// Honeycomb patch of the hexagons whose centres satisfy max(|i|, |j|, |i + j|) < radius, theta = pi/3.
IsoradialLattice build_hexagonal(int radius);

IsoradialLattice build_lattice(LatticeKind kind, int radius);

/**
 * Validates user-supplied rhombic data.
 *
 * A vertex counts as interior when its incident edges surround it (every
 * angular gap between consecutive edges is below pi); the rhombus angles at
 * interior vertices must sum to pi. Boundary vertices may not exceed pi.
 */
IsoradialLattice from_rhombic_data(std::vector<Point> vertices,
                                   std::vector<std::array<int, 2>> edges,
                                   std::vector<double> theta,
                                   std::optional<double> circumradius = std::nullopt);

/// Keeps the listed edges; full degrees stay those of the parent lattice.
IsoradialLattice subgraph(const IsoradialLattice& lattice, std::span<const int> keep);

/// Largest deviation of an interior angle sum from pi.
double max_angle_sum_defect(const IsoradialLattice& lattice);

struct IsingWeights
{
    double beta = 1.0;
    Eigen::VectorXd J;  // +inf where theta >= pi/2
    Eigen::VectorXd x;
};

/// x_e = tanh(beta J_e) with tanh J_e = tan(theta_e / 2); beta = 1 gives tan(theta_e / 2) directly.
IsingWeights weights(const IsoradialLattice& lattice, double beta);

Eigen::VectorXd critical_weights(const IsoradialLattice& lattice);

} // namespace kacward

#endif // KACWARD_ISORADIAL_HPP
