// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "kacward/fermion.hpp"
#include "kacward/isoradial.hpp"
#include "kacward/operator.hpp"
#include "kacward/sholo.hpp"
#include "kacward/spectral.hpp"
#include "kacward/walks.hpp"
#include "oracles.hpp"

using namespace kacward;
using cplx = std::complex<double>;

namespace {

struct Outcome
{
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

Eigen::VectorXd uniform(const PlanarGraph& g, double x)
{
    return Eigen::VectorXd::Constant(g.num_edges(), x);
}

// Random subgraph of the 4x4 vertex box keeping `edges` edges.
PlanarGraph random_box_subgraph(std::mt19937_64& rng, int edges)
{
    const IsoradialLattice box = build_square_box(4, 4);
    std::vector<int> keep(box.graph.num_edges());
    for (int k = 0; k < box.graph.num_edges(); ++k)
        keep[k] = k;
    std::shuffle(keep.begin(), keep.end(), rng);
    keep.resize(edges);
    std::sort(keep.begin(), keep.end());
    return box.graph.subgraph(keep);
}

struct NamedGraph
{
    std::string name;
    PlanarGraph graph;
};

std::vector<NamedGraph> crossing_free_graphs()
{
    std::mt19937_64 rng(2024);
    std::vector<NamedGraph> out;
    out.push_back({"4-cycle", oracle::four_cycle()});
    out.push_back({"2x2 box", build_square_box(2, 2).graph});
    out.push_back({"2x3 box", build_square_box(2, 3).graph});
    out.push_back({"3x3 box", build_square_box(3, 3).graph});
    out.push_back({"hexagon", oracle::hexagon()});
    for (int i = 0; i < 3; ++i)
        out.push_back({"box subgraph " + std::to_string(i), random_box_subgraph(rng, 16)});
    for (int i = 0; i < 3; ++i)
        out.push_back({"random " + std::to_string(i), oracle::random_graph(rng, 9, 14 + i, false)});
    return out;
}

Outcome determinant_identity()
{
    Outcome o;
    std::mt19937_64 rng(1);
    double worst = 0.0;
    int checked = 0;
    for (const NamedGraph& ng : crossing_free_graphs()) {
        o.require(!ng.graph.has_crossings() && ng.graph.num_edges() <= 16, ng.name + " is not a test graph");
        for (int trial = 0; trial < 5; ++trial) {
            const Eigen::VectorXd x = oracle::random_weights(rng, ng.graph.num_edges(), 0.01, 0.99);
            const double z = oracle::brute_force_Z(ng.graph, x);
            const PartitionValue kw = partition_Z(ng.graph, x);
            const double err = std::abs(z - kw.value) / z;
            worst = std::max(worst, err);
            ++checked;
        }
    }
    o.require(worst < 1e-10, "relative error");

    const PlanarGraph k4 = oracle::k4_with_crossing();
    double worst_k4 = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::VectorXd x = oracle::random_weights(rng, 6, 0.01, 0.99);
        const double z = oracle::brute_force_Z(k4, x);
        const cplx det = determinant<double>(kac_ward_operator<double>(k4, x));
        worst_k4 = std::max(worst_k4, std::abs(z * z - det) / (z * z));
        const PartitionValue resolved = partition_Z(k4, x, z);
        o.require(std::abs(resolved.value - z) <= 1e-10 * std::abs(z), "K4 sign resolution");
    }
    o.require(worst_k4 < 1e-10, "K4 Z^2 = det T");
    o.detail << checked << " crossing-free cases, max rel err " << worst << "; K4 max rel err " << worst_k4;
    return o;
}

double fermion_vs_inverse(const PlanarGraph& g, const Eigen::VectorXd& x)
{
    const Eigen::MatrixXcd F = fermion_matrix(g, x);
    const InverseOperator<double> inverse = invert(kac_ward_operator<double>(g, x));
    return (F.conjugate() - inverse.matrix).cwiseAbs().maxCoeff();
}

Outcome inverse_is_fermionic()
{
    Outcome o;
    const IsoradialLattice box = build_square_box(3, 3);
    std::mt19937_64 rng(2);
    const double box_err = fermion_vs_inverse(box.graph, oracle::random_weights(rng, box.graph.num_edges()));
    const PlanarGraph g = oracle::random_graph(rng, 8, 10, false);
    o.require(g.num_edges() == 10 && !g.has_crossings(), "random graph shape");
    const double random_err = fermion_vs_inverse(g, oracle::random_weights(rng, g.num_edges()));
    o.require(box_err < 1e-9 && random_err < 1e-9, "max abs error");
    o.detail << "3x3 box " << box.graph.num_directed() * box.graph.num_directed() << " pairs max err " << box_err
             << "; random 10-edge max err " << random_err;
    return o;
}

Outcome walk_expansion()
{
    Outcome o;
    const IsoradialLattice box = build_square_box(3, 3);
    const PlanarGraph& g = box.graph;
    const Eigen::VectorXd x = uniform(g, 0.1);
    const SparseOperator<double> lambda = transition_matrix<double>(g, x);
    const InverseOperator<double> inverse = invert(kac_ward_operator<double>(lambda));
    const TailBound bound = small_weight_bound<double>(g, x);
    for (int R : {8, 12, 16}) {
        const SeriesSum<double> s = walk_series_sum(lambda, R, bound);
        const double err = (s.sum - inverse.matrix).cwiseAbs().maxCoeff();
        o.require(err < s.tail, "R = " + std::to_string(R));
        o.detail << "R=" << R << " err " << err << " < tail " << s.tail << "; ";
    }
    double worst = 0.0;
    std::vector<Eigen::MatrixXcd> powers;
    for (int r = 0; r <= 8; ++r)
        powers.emplace_back(walk_series_term(lambda, r));
    for (int e = 0; e < g.num_directed(); ++e)
        for (int target = 0; target < g.num_directed(); ++target) {
            const auto sums = walk_sums_by_length(g, x, e, target, 8);
            for (int r = 0; r <= 8; ++r)
                worst = std::max(worst, std::abs(sums[r] - powers[r](e, target)));
        }
    o.require(worst < 1e-12, "enumeration vs Lambda^r");
    o.detail << "enumeration vs Lambda^r (r<=8) max err " << worst;
    return o;
}

// Truncated sums over restricted walk classes, by enumeration.
struct RestrictedSums
{
    cplx V_ee = 0.0, U_ee = 0.0;
};

RestrictedSums restricted_sums(const PlanarGraph& g, const Eigen::VectorXd& x, int e, int R)
{
    RestrictedSums s;
    for_each_walk(g, e, R, [&](std::span<const int> path) {
        if (path.back() != e)
            return;
        const cplx w = walk_weight(g, x, path);
        bool avoids = true;
        for (int d : path)
            avoids = avoids && d != reversed(e);
        if (avoids)
            s.U_ee += w;
        if (path.size() >= 2) {
            bool once = true;
            for (std::size_t i = 1; i + 1 < path.size(); ++i)
                once = once && undirected(path[i]) != undirected(e);
            if (once)
                s.V_ee += w;
        }
    });
    return s;
}

cplx first_visit_enumerated(const PlanarGraph& g, const Eigen::VectorXd& x, int e, int target, int R)
{
    cplx total = 0.0;
    for_each_walk(g, e, R, [&](std::span<const int> path) {
        if (path.size() < 2 || path.back() != target)
            return;
        for (std::size_t i = 1; i + 1 < path.size(); ++i)
            if (undirected(path[i]) == undirected(e) || undirected(path[i]) == undirected(target))
                return;
        total += walk_weight(g, x, path);
    });
    return total;
}

// Sum over closed walks at target in G without the edge of e, truncated at R.
cplx removed_return_enumerated(const PlanarGraph& g, const Eigen::VectorXd& x, int e, int target, int R)
{
    cplx total = 0.0;
    for_each_walk(g, target, R, [&](std::span<const int> path) {
        if (path.back() != target)
            return;
        for (int d : path)
            if (undirected(d) == undirected(e))
                return;
        total += walk_weight(g, x, path);
    });
    return total;
}

Outcome walk_cancellations()
{
    Outcome o;
    // e to -e on every test graph
    std::vector<NamedGraph> graphs = crossing_free_graphs();
    graphs.push_back({"K4 with crossing", oracle::k4_with_crossing()});
    graphs.push_back({"bowtie", oracle::bowtie()});
    graphs.push_back({"tri patch", build_triangular(2).graph});
    graphs.push_back({"hex patch", build_hexagonal(2).graph});
    std::mt19937_64 rng(4);
    double worst_reverse = 0.0;
    for (const NamedGraph& ng : graphs) {
        const Eigen::VectorXd x = oracle::random_weights(rng, ng.graph.num_edges(), 0.05, 0.5);
        const InverseOperator<double> inverse = invert(kac_ward_operator<double>(ng.graph, x));
        for (int e = 0; e < ng.graph.num_directed(); ++e)
            worst_reverse = std::max(worst_reverse, std::abs(inverse.matrix(e, reversed(e))));
    }
    o.require(worst_reverse < 1e-10, "T^-1(e, -e) = 0");

    // loop and factorization identities on the 3x3 box at x = 0.1
    const IsoradialLattice box = build_square_box(3, 3);
    const PlanarGraph& g = box.graph;
    const Eigen::VectorXd x = uniform(g, 0.1);
    const SparseOperator<double> lambda = transition_matrix<double>(g, x);
    const InverseOperator<double> inverse = invert(kac_ward_operator<double>(lambda));
    const int R = 10;
    const double tail = small_weight_bound<double>(g, x).tail(R);
    double worst_identity = 0.0, worst_truncation = 0.0;
    for (int e = 0; e < g.num_directed(); ++e) {
        const cplx V = first_visit_sum(lambda, e, e);
        const cplx U = avoiding_sum(lambda, e);
        const cplx W = inverse.matrix(e, e);
        worst_identity = std::max({worst_identity, std::abs(W - U), std::abs(W - 1.0 / (1.0 - V))});
        const RestrictedSums s = restricted_sums(g, x, e, R);
        worst_truncation = std::max({worst_truncation, std::abs(s.V_ee - V) / tail, std::abs(s.U_ee - U) / tail});
        for (int target = 0; target < g.num_directed(); ++target) {
            if (undirected(target) == undirected(e))
                continue;
            const cplx Veg = first_visit_sum(lambda, e, target);
            const cplx Wgg = removed_edge_return_sum(lambda, e, target);
            worst_identity = std::max(worst_identity, std::abs(inverse.matrix(e, target) - W * Veg * Wgg));
            if (target % 5 == e % 5) {
                worst_truncation = std::max(
                    {worst_truncation, std::abs(first_visit_enumerated(g, x, e, target, R) - Veg) / tail,
                     std::abs(removed_return_enumerated(g, x, e, target, R) - Wgg) / tail});
            }
        }
    }
    o.require(worst_identity < 1e-12, "loop/factorization identities");
    o.require(worst_truncation < 1.0, "truncated enumeration within tail");

    // Z_G = (1 - V(e, e)) Z_{G \ e} on graphs with at most 12 edges
    std::vector<NamedGraph> small;
    for (const NamedGraph& ng : graphs)
        if (ng.graph.num_edges() <= 12)
            small.push_back(ng);
    for (int i = 0; i < 3; ++i)
        small.push_back({"random crossed " + std::to_string(i), oracle::random_graph(rng, 8, 12, true)});
    double worst_z = 0.0;
    for (const NamedGraph& ng : small) {
        const Eigen::VectorXd xs = oracle::random_weights(rng, ng.graph.num_edges(), 0.05, 0.6);
        const SparseOperator<double> lam = transition_matrix<double>(ng.graph, xs);
        const double z = oracle::brute_force_Z(ng.graph, xs);
        for (int e = 0; e < ng.graph.num_directed(); ++e) {
            std::vector<int> keep;
            for (int k = 0; k < ng.graph.num_edges(); ++k)
                if (k != undirected(e))
                    keep.push_back(k);
            Eigen::VectorXd xk(static_cast<Eigen::Index>(keep.size()));
            for (std::size_t i = 0; i < keep.size(); ++i)
                xk[static_cast<Eigen::Index>(i)] = xs[keep[i]];
            const double without = oracle::brute_force_Z(ng.graph.subgraph(keep), xk);
            const cplx predicted = (1.0 - first_visit_sum(lam, e, e)) * without;
            worst_z = std::max(worst_z, std::abs(predicted - z) / std::abs(z));
        }
    }
    o.require(worst_z < 1e-10, "Z_G = (1 - V) Z_{G\\e}");
    o.detail << "max |T^-1(e,-e)| " << worst_reverse << " on " << graphs.size() << " graphs; identities max err "
             << worst_identity << "; truncation err / tail max " << worst_truncation << "; edge removal on "
             << small.size() << " graphs max rel err " << worst_z;
    return o;
}

Outcome whitney()
{
    Outcome o;
    const IsoradialLattice box = build_square_box(3, 3);
    const PlanarGraph k4 = oracle::k4_with_crossing();
    double worst = 0.0;
    std::size_t count = 0;
    int crossed = 0;
    for (const PlanarGraph* g : {&box.graph, &k4}) {
        for (const Walk& p : enumerate_closed_paths(*g, uniform(*g, 0.5), 10)) {
            const WhitneyCheck c = whitney_check(*g, p.edges);
            worst = std::max(worst, c.error);
            crossed += c.crossings % 2;
            ++count;
        }
    }
    o.require(worst < 1e-12, "phase error");
    o.require(crossed > 0, "some path with odd crossings");
    o.detail << count << " closed paths (" << crossed << " with odd crossings), max phase error " << worst;
    return o;
}

Outcome sholomorphicity()
{
    Outcome o;
    struct Case
    {
        std::string name;
        IsoradialLattice lattice;
    };
    const std::vector<Case> cases{{"square 4x4", build_square_box(4, 4)},
                                  {"tri", build_triangular(2)},
                                  {"hex", build_hexagonal(3)}};
    double worst_off = 0.0, least_at = std::numeric_limits<double>::infinity(), worst_const = 0.0,
           worst_branch = 0.0;
    for (const Case& c : cases) {
        const IsoradialLattice& L = c.lattice;
        const SparseOperator<double> t = kac_ward_operator<double>(L.graph, critical_weights(L));
        const Eigen::PartialPivLU<Eigen::MatrixXcd> lu{Eigen::MatrixXcd(t)};
        for (int e = 0; e < L.graph.num_directed(); ++e) {
            const Eigen::VectorXcd f = observable_column(L, lu, e);
            for (int v = 0; v < L.graph.num_vertices(); ++v) {
                const SholomorphicityReport r = sholomorphicity_at(L, f, v);
                if (!r.applicable)
                    continue;
                if (v == L.graph.tail(e))
                    least_at = std::min(least_at, r.max_residual);
                else
                    worst_off = std::max(worst_off, r.max_residual);
                const SholomorphicityReport n = sholomorphicity_at(L, f, v, Branch::negated);
                for (std::size_t i = 0; i < r.corners.size(); ++i)
                    worst_branch = std::max(worst_branch, std::abs(r.corners[i].residual - n.corners[i].residual));
            }
        }
        const Eigen::VectorXcd image = t * S_apply(L, Eigen::VectorXcd::Ones(L.graph.num_edges()));
        for (int d = 0; d < L.graph.num_directed(); ++d)
            if (L.is_interior(L.graph.head(d)))
                worst_const = std::max(worst_const, std::abs(image[d]));
    }
    o.require(worst_off < 1e-9, "residual off t(e)");
    o.require(least_at > 1e-3, "residual at t(e)");
    o.require(worst_const < 1e-10, "T S 1 = 0");
    o.require(worst_branch < 1e-14, "branch independence");
    o.detail << "max residual off t(e) " << worst_off << "; min residual at t(e) " << least_at << "; max |TS1| "
             << worst_const << "; branch difference " << worst_branch;
    return o;
}

Outcome critical_spectral_radius()
{
    Outcome o;
    for (int radius : {2, 3, 4}) {
        const IsoradialLattice box = build_square(radius);
        const SparseOperator<double> lambda = transition_matrix<double>(box.graph, critical_weights(box));
        const Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(Eigen::MatrixXcd(lambda), false);
        const double rho = solver.eigenvalues().cwiseAbs().maxCoeff();
        const Certificate cert = criticality_certificate(box);
        double sharp = 0.0;
        for (int v = 0; v < box.graph.num_vertices(); ++v)
            if (box.is_interior(v))
                sharp = std::max(sharp, std::abs(cert.xi_initial[v] - 1.0));
        o.require(rho < 1.0, "rho < 1 at radius " + std::to_string(radius));
        o.require(cert.certified(), "certificate at radius " + std::to_string(radius));
        o.require(sharp < 1e-10, "xi0 = 1 at radius " + std::to_string(radius));
        o.detail << "r=" << radius << ": rho " << rho << ", max xi " << cert.max_xi() << ", |xi0-1| " << sharp
                 << "; ";
    }
    return o;
}

Outcome supercritical_decay()
{
    Outcome o;
    const IsoradialLattice box = build_square(4);
    for (double beta : {0.5, 0.8}) {
        const DecayProfile p = decay_profile(box, beta, 20, 4);
        const double log_eps = std::log(p.epsilon.epsilon);
        o.require(p.all_under_bound(), "entries under C eps^r");
        o.require(p.slope <= log_eps + 0.02, "slope");
        o.require(p.inverse_slope <= log_eps + 0.05, "inverse slope");
        o.detail << "beta=" << beta << ": eps " << p.epsilon.epsilon << ", C " << p.C << ", slope " << p.slope
                 << " (log eps " << log_eps << "), inverse slope " << p.inverse_slope << "; ";
    }
    return o;
}

Outcome critical_degeneration()
{
    Outcome o;
    std::vector<double> ratios;
    for (int radius : {4, 8, 16, 24}) {
        const NoninvertibilityReport r = noninvertibility_ratio(LatticeKind::square, radius);
        o.require(r.sup_bound_holds(), "sup bound at r=" + std::to_string(radius));
        o.require(r.norm_bound_holds(), "norm bound at r=" + std::to_string(radius));
        if (!ratios.empty())
            o.require(r.ratio < ratios.back(), "decrease at r=" + std::to_string(radius));
        ratios.push_back(r.ratio);
        o.detail << "r=" << radius << " ratio " << r.ratio << "; ";
    }
    o.require(ratios.back() < 0.5 * ratios.front(), "ratio(24) < ratio(4) / 2");
    return o;
}

Outcome cross_formula()
{
    Outcome o;
    const IsoradialLattice box = build_square_box(3, 3);
    const Eigen::VectorXd x = critical_weights(box);
    const Eigen::MatrixXcd F = fermion_matrix(box.graph, x);
    const InverseOperator<double> inverse = invert(kac_ward_operator<double>(box.graph, x));
    double worst = 0.0;
    for (int e = 0; e < box.graph.num_directed(); ++e) {
        const Eigen::VectorXcd f = observable_column(box, inverse.matrix, e);
        std::vector<cplx> ratios;
        for (int g = 0; g < box.graph.num_edges(); ++g) {
            const cplx s = symmetrized_observable(F, e, g, box.theta);
            if (std::abs(f[g]) > 1e-8)
                ratios.push_back(s / f[g]);
            else
                o.require(std::abs(s) < 1e-8, "zero pattern");
        }
        double spread = 0.0;
        for (const cplx& r : ratios)
            spread = std::max(spread, std::abs(r - ratios.front()) / std::abs(ratios.front()));
        worst = std::max(worst, spread);
    }
    o.require(worst < 1e-9, "relative spread");
    o.detail << "max relative spread of the ratio " << worst;
    return o;
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"determinant identity", determinant_identity},
        {"inverse equals fermionic generating function", inverse_is_fermionic},
        {"walk expansion", walk_expansion},
        {"walk cancellations", walk_cancellations},
        {"Whitney", whitney},
        {"s-holomorphicity", sholomorphicity},
        {"critical spectral radius", critical_spectral_radius},
        {"supercritical decay", supercritical_decay},
        {"critical degeneration", critical_degeneration},
        {"cross-formula consistency", cross_formula},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& err) {
            o.pass = false;
            o.detail << "exception: " << err.what();
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !o.pass;
        std::printf("criterion %zu %s: %s (%.1fs) %s\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                    seconds, o.detail.str().c_str());
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
