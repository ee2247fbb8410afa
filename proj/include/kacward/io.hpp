#ifndef KACWARD_IO_HPP
#define KACWARD_IO_HPP

#include <complex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "kacward/isoradial.hpp"
#include "kacward/operator.hpp"
#include "kacward/sholo.hpp"
#include "kacward/spectral.hpp"
#include "kacward/walks.hpp"

namespace kacward {

using Json = nlohmann::ordered_json;

/**
 * Graph JSON: {"vertices": [[x, y], ...], "edges": [[i, j], ...], "weights": [w, ...]}
 * with optional "weights". A "theta" array (and optional "circumradius")
 * makes it lattice JSON.
 */
struct GraphInput
{
    PlanarGraph graph;
    std::optional<Eigen::VectorXd> weights;
    std::optional<IsoradialLattice> lattice;
};

/// Syntax errors carry line and column; structural errors carry the JSON path.
GraphInput parse_graph_json(const std::string& text);
GraphInput read_graph_file(const std::string& path);

Json graph_json(const PlanarGraph& graph, const Eigen::VectorXd* weights = nullptr);

Json complex_json(std::complex<double> z);
Json complex_vector_json(const Eigen::VectorXcd& v);

/// CSV triplets row,col,re,im of the nonzero entries.
void write_triplets_csv(std::ostream& out, const SparseOperator<double>& a);

/// Dense CSV: a "dim,layout" header line, then one line per row with re,im pairs.
void write_dense_csv(std::ostream& out, const Eigen::MatrixXcd& a);

/// {"edges": [...], "weight": [re, im], "winding": alpha}
Json walk_json(const Walk& walk);

/// {"xi": {vertex: value}, "weights": {directed edge: value}, "shells": [[...], ...]}
Json certificate_json(const Certificate& cert);

/// Columns r,max_entry,bound.
void write_decay_csv(std::ostream& out, const DecayProfile& profile);

/// Columns vertex,face,residual.
void write_residual_csv(std::ostream& out, const std::vector<CornerResidual>& rows);

/// Fixed round-trip formatting for CSV numbers.
std::string format_number(double value);

} // namespace kacward

#endif // KACWARD_IO_HPP
