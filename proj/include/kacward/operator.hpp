#ifndef KACWARD_OPERATOR_HPP
#define KACWARD_OPERATOR_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "kacward/geometry.hpp"

namespace kacward {

template <typename Real = double>
using SparseOperator = Eigen::SparseMatrix<std::complex<Real>, Eigen::RowMajor>;

template <typename Real = double>
using DenseOperator = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real = double>
using RealVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

inline constexpr int kUnreachable = std::numeric_limits<int>::max();

namespace detail {

template <typename Real>
void check_weights(const PlanarGraph& graph, const RealVector<Real>& x)
{
    if (x.size() != graph.num_edges()) {
        std::ostringstream os;
        os << "expected " << graph.num_edges() << " edge weights, got " << x.size();
        throw Error(ErrorKind::missing_weight, os.str());
    }
    for (Eigen::Index k = 0; k < x.size(); ++k)
        if (!(x[k] > Real(0)) || !std::isfinite(static_cast<double>(x[k]))) {
            std::ostringstream os;
            os << "weight of edge " << k << " is not a positive finite number";
            throw Error(ErrorKind::missing_weight, os.str());
        }
}

} // namespace detail

/**
 * Kac-Ward transition matrix on directed edges:
 * Lambda(e, g) = x_e exp(i/2 angle(e, g)) when h(e) = t(g) and g != -e.
 *
 * The weight is that of the source edge e.
 */
template <typename Real = double>
SparseOperator<Real> transition_matrix(const PlanarGraph& graph, const RealVector<Real>& x)
{
    detail::check_weights(graph, x);
    const int n = graph.num_directed();
    std::vector<Eigen::Triplet<std::complex<Real>>> entries;
    entries.reserve(static_cast<std::size_t>(n) * std::max(graph.max_degree() - 1, 0));
    for (int e = 0; e < n; ++e) {
        const Real weight = x[undirected(e)];
        for (int g : graph.out_edges(graph.head(e))) {
            if (g == reversed(e))
                continue;
            const Real half = static_cast<Real>(turning_angle(graph, e, g)) / 2;
            entries.emplace_back(e, g, std::polar(weight, half));
        }
    }
    SparseOperator<Real> lambda(n, n);
    lambda.setFromTriplets(entries.begin(), entries.end());
    lambda.makeCompressed();
    return lambda;
}

/// T = I - Lambda.
template <typename Real = double>
SparseOperator<Real> kac_ward_operator(const SparseOperator<Real>& lambda)
{
    SparseOperator<Real> identity(lambda.rows(), lambda.cols());
    identity.setIdentity();
    SparseOperator<Real> t = identity - lambda;
    t.makeCompressed();
    return t;
}

template <typename Real = double>
SparseOperator<Real> kac_ward_operator(const PlanarGraph& graph, const RealVector<Real>& x)
{
    return kac_ward_operator<Real>(transition_matrix<Real>(graph, x));
}

/// Reciprocal condition estimate below which a factorization is treated as singular.
inline constexpr double kSingularRcond = 1e-14;

/// det T by dense LU with partial pivoting.
template <typename Real = double>
std::complex<Real> determinant(const SparseOperator<Real>& t)
{
    if (t.rows() == 0)
        return std::complex<Real>(1);
    const DenseOperator<Real> dense(t);
    const Eigen::PartialPivLU<DenseOperator<Real>> lu(dense);
    if (!(static_cast<double>(lu.rcond()) > kSingularRcond))
        throw Error(ErrorKind::singular_operator, "Kac-Ward operator is numerically singular");
    return lu.determinant();
}

struct PartitionValue
{
    double value = 1.0;
    std::complex<double> det = 1.0;
    bool sign_resolved = true;
};

/**
 * Z from Z^2 = det T.
 *
 * The positive root is exact for crossing-free graphs (det T > 1 there). With
 * crossings the sign is taken from the oracle value when one is supplied and
 * is otherwise reported as unresolved.
 */
inline PartitionValue partition_from_determinant(std::complex<double> det, bool crossing_free,
                                                 std::optional<double> oracle = std::nullopt)
{
    const double scale = std::max(1.0, std::abs(det));
    if (std::abs(det.imag()) > 1e-8 * scale || det.real() < -1e-12 * scale) {
        std::ostringstream os;
        os << "det T = (" << det.real() << ", " << det.imag()
           << ") is not a nonnegative real; resolve Z with the even-subgraph oracle";
        throw Error(ErrorKind::branch_ambiguity, os.str());
    }
    PartitionValue z;
    z.det = det;
    const double root = std::sqrt(std::max(det.real(), 0.0));
    if (crossing_free) {
        z.value = root;
    } else if (oracle) {
        z.value = std::copysign(root, *oracle);
    } else {
        z.value = root;
        z.sign_resolved = false;
    }
    return z;
}

inline PartitionValue partition_Z(const PlanarGraph& graph, const Eigen::VectorXd& x,
                                  std::optional<double> oracle = std::nullopt)
{
    return partition_from_determinant(determinant<double>(kac_ward_operator<double>(graph, x)),
                                      !graph.has_crossings(), oracle);
}

template <typename Real = double>
struct InverseOperator
{
    DenseOperator<Real> matrix;
    double rcond = 0.0;     // reciprocal condition estimate of T
    double residual = 0.0;  // max |T T^-1 - I|
};

/**
 * Dense T^-1 by LU solves against identity columns.
 *
 * Columns are split between threads; every column goes through the same
 * factorization, so the result does not depend on the thread count.
 */
template <typename Real = double>
InverseOperator<Real> invert(const SparseOperator<Real>& t, int threads = 1)
{
    const Eigen::Index n = t.rows();
    InverseOperator<Real> result;
    result.matrix = DenseOperator<Real>::Identity(n, n);
    if (n == 0) {
        result.rcond = 1.0;
        return result;
    }
    const DenseOperator<Real> dense(t);
    const Eigen::PartialPivLU<DenseOperator<Real>> lu(dense);
    result.rcond = static_cast<double>(lu.rcond());
    if (!(result.rcond > kSingularRcond))
        throw Error(ErrorKind::singular_operator, "Kac-Ward operator is numerically singular");

    const int workers = static_cast<int>(std::clamp<Eigen::Index>(threads, 1, n));
    const Eigen::Index chunk = (n + workers - 1) / workers;
    auto solve = [&](Eigen::Index begin) {
        const Eigen::Index cols = std::min(chunk, n - begin);
        if (cols > 0)
            result.matrix.middleCols(begin, cols) = lu.solve(result.matrix.middleCols(begin, cols));
    };
    if (workers == 1) {
        solve(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(solve, w * chunk);
        for (auto& th : pool)
            th.join();
    }
    const DenseOperator<Real> product = t * result.matrix;
    result.residual = static_cast<double>(
        (product - DenseOperator<Real>::Identity(n, n)).cwiseAbs().maxCoeff());
    return result;
}

/// Lambda^r; entry (e, g) is the total signed weight of walks of length r from e to g.
template <typename Real = double>
SparseOperator<Real> walk_series_term(const SparseOperator<Real>& lambda, int r)
{
    if (r < 0)
        throw Error(ErrorKind::invalid_argument, "walk length must be nonnegative");
    SparseOperator<Real> power(lambda.rows(), lambda.cols());
    power.setIdentity();
    for (int i = 0; i < r; ++i) {
        SparseOperator<Real> next = power * lambda;
        next.prune(std::complex<Real>(0));
        power = std::move(next);
    }
    return power;
}

/// Entrywise bound |(Lambda^r)_{e,g}| <= C epsilon^r.
struct TailBound
{
    double C = 1.0;
    double epsilon = 1.0;
    std::string source;

    bool converges() const { return epsilon < 1.0; }
    /// Bound on sum_{r > R} |(Lambda^r)_{e,g}|.
    double tail(int R) const
    {
        return converges() ? C * std::pow(epsilon, R + 1) / (1.0 - epsilon)
                           : std::numeric_limits<double>::infinity();
    }
};

/// Every entry of Lambda^r sums at most (Delta - 1)^r walks of weight at most |x|^r.
template <typename Real = double>
TailBound small_weight_bound(const PlanarGraph& graph, const RealVector<Real>& x)
{
    const double branching = std::max(graph.max_degree() - 1, 0);
    const double sup = x.size() ? static_cast<double>(x.maxCoeff()) : 0.0;
    return {1.0, branching * sup, "small-weight"};
}

template <typename Real = double>
struct SeriesSum
{
    DenseOperator<Real> sum;
    double tail = std::numeric_limits<double>::infinity();
};

/**
 * Partial sum sum_{r <= R} Lambda^r with an entrywise tail bound.
 *
 * Refuses without a converging bound unless allow_uncertified is set, in
 * which case the tail is reported as infinite.
 */
template <typename Real = double>
SeriesSum<Real> walk_series_sum(const SparseOperator<Real>& lambda, int R,
                                std::optional<TailBound> bound, bool allow_uncertified = false)
{
    if (R < 0)
        throw Error(ErrorKind::invalid_argument, "series length must be nonnegative");
    if ((!bound || !bound->converges()) && !allow_uncertified)
        throw Error(ErrorKind::refused, "walk series has no convergence certificate");
    const Eigen::Index n = lambda.rows();
    SeriesSum<Real> result;
    result.sum = DenseOperator<Real>::Identity(n, n);
    DenseOperator<Real> power = DenseOperator<Real>::Identity(n, n);
    for (int r = 1; r <= R; ++r) {
        power = power * lambda;
        result.sum += power;
    }
    if (bound && bound->converges())
        result.tail = bound->tail(R);
    return result;
}

/// Shortest walk lengths from e to every directed edge (kUnreachable if none).
inline std::vector<int> distances_from(const PlanarGraph& graph, int e)
{
    std::vector<int> dist(graph.num_directed(), kUnreachable);
    std::deque<int> queue{e};
    dist[e] = 0;
    while (!queue.empty()) {
        const int current = queue.front();
        queue.pop_front();
        for (int g : graph.out_edges(graph.head(current))) {
            if (g == reversed(current) || dist[g] != kUnreachable)
                continue;
            dist[g] = dist[current] + 1;
            queue.push_back(g);
        }
    }
    return dist;
}

inline int distance(const PlanarGraph& graph, int e, int g)
{
    return distances_from(graph, e)[g];
}

} // namespace kacward

#endif // KACWARD_OPERATOR_HPP
