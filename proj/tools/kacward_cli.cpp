#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "kacward/fermion.hpp"
#include "kacward/io.hpp"
#include "kacward/isoradial.hpp"
#include "kacward/operator.hpp"
#include "kacward/sholo.hpp"
#include "kacward/spectral.hpp"
#include "kacward/version.hpp"
#include "kacward/walks.hpp"

using namespace kacward;

namespace {

struct RunConfig
{
    std::string command;
    std::string graph_path;
    std::string lattice;
    int radius = 2;
    double beta = 1.0;
    std::optional<double> uniform_x;
    int threads = 1;
    unsigned long long seed = 0;
    double solve_tol = 1e-10;
    double test_tol = 1e-9;
    std::string format = "json";
    std::string output;

    int edge = 0;
    std::optional<int> target;
    int max_length = 8;
    int oracle_max_edges = 16;
    int r_max = 20;
    std::vector<int> radii{4, 8, 16};
};

// A graph with its weights, and the lattice when there is one.
struct Problem
{
    PlanarGraph graph;
    Eigen::VectorXd x;
    std::optional<IsoradialLattice> lattice;
};

int threads_from_environment()
{
    if (const char* env = std::getenv("KW_THREADS")) {
        try {
            return std::max(1, std::stoi(env));
        } catch (const std::exception&) {
            throw Error(ErrorKind::invalid_argument, "KW_THREADS is not an integer");
        }
    }
    return 1;
}

Json config_json(const RunConfig& c)
{
    Json j;
    j["command"] = c.command;
    if (!c.graph_path.empty())
        j["graph"] = c.graph_path;
    if (!c.lattice.empty()) {
        j["lattice"] = c.lattice;
        j["radius"] = c.radius;
    }
    j["beta"] = c.beta;
    if (c.uniform_x)
        j["x"] = *c.uniform_x;
    j["threads"] = c.threads;
    j["solve_tol"] = c.solve_tol;
    j["test_tol"] = c.test_tol;
    j["format"] = c.format;
    const std::string& cmd = c.command;
    if (cmd == "fermion" || cmd == "observable" || cmd == "walks") {
        j["edge"] = c.edge;
        if (c.target)
            j["target"] = *c.target;
    }
    if (cmd == "z" || cmd == "fermion")
        j["oracle_max_edges"] = c.oracle_max_edges;
    if (cmd == "walks" || cmd == "whitney")
        j["max_length"] = c.max_length;
    if (cmd == "decay")
        j["rmax"] = c.r_max;
    if (cmd == "noninv")
        j["radii"] = c.radii;
    return j;
}

Json header(const RunConfig& c)
{
    Json j;
    j["config"] = config_json(c);
    j["versions"] = {
        {"kacward", kVersion},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
    };
    j["seed"] = c.seed;
    return j;
}

IsoradialLattice require_lattice(const RunConfig& c, const std::optional<IsoradialLattice>& lattice)
{
    if (!lattice)
        throw Error(ErrorKind::not_applicable, c.command + " needs --lattice or lattice JSON with theta");
    return *lattice;
}

Problem load(const RunConfig& c)
{
    if (!(c.beta > 0.0 && c.beta <= 1.0))
        throw Error(ErrorKind::invalid_argument, "--beta must lie in (0, 1]");
    Problem p;
    std::optional<Eigen::VectorXd> file_weights;
    if (!c.graph_path.empty() && !c.lattice.empty())
        throw Error(ErrorKind::invalid_argument, "give either --graph or --lattice");
    if (!c.graph_path.empty()) {
        GraphInput input = read_graph_file(c.graph_path);
        p.graph = std::move(input.graph);
        p.lattice = std::move(input.lattice);
        file_weights = std::move(input.weights);
    } else if (!c.lattice.empty()) {
        p.lattice = build_lattice(parse_lattice_kind(c.lattice), c.radius);
        p.graph = p.lattice->graph;
    } else {
        throw Error(ErrorKind::invalid_argument, "one of --graph or --lattice is required");
    }

    if (c.uniform_x) {
        if (!(*c.uniform_x > 0.0))
            throw Error(ErrorKind::missing_weight, "--x must be positive");
        p.x = Eigen::VectorXd::Constant(p.graph.num_edges(), *c.uniform_x);
    } else if (file_weights) {
        p.x = *file_weights;
    } else if (p.lattice) {
        p.x = weights(*p.lattice, c.beta).x;
    } else if (p.graph.num_edges() == 0) {
        p.x = Eigen::VectorXd();
    } else {
        throw Error(ErrorKind::missing_weight, "graph has no weights; pass --x or add \"weights\"");
    }
    return p;
}

void require_directed(const PlanarGraph& graph, int d, const char* what)
{
    if (d < 0 || d >= graph.num_directed()) {
        std::ostringstream os;
        os << what << " " << d << " is not a directed edge (0.." << graph.num_directed() - 1 << ")";
        throw Error(ErrorKind::invalid_edge, os.str());
    }
}

// Scalar fields of a report as key,value lines.
void flatten_csv(std::ostream& out, const Json& j, const std::string& prefix)
{
    for (const auto& [key, value] : j.items()) {
        const std::string name = prefix.empty() ? key : prefix + "." + key;
        if (value.is_object()) {
            flatten_csv(out, value, name);
        } else if (!value.is_array()) {
            out << name << ',' << value.dump() << '\n';
        } else if (std::all_of(value.begin(), value.end(), [](const Json& v) { return v.is_primitive(); })) {
            std::string text = value.dump();
            out << name << ",\"" << text << "\"\n";
        }
    }
}

struct Output
{
    Json report;
    std::string csv;  // empty: key,value projection of the report
};

Output cmd_z(const RunConfig& c)
{
    const Problem p = load(c);
    Output o;
    Json& r = o.report;
    const std::complex<double> det = determinant<double>(kac_ward_operator<double>(p.graph, p.x));
    r["det_T"] = complex_json(det);
    std::optional<double> oracle;
    if (p.graph.num_edges() <= c.oracle_max_edges && oracle_feasible(p.graph)) {
        oracle = oracle_Z(p.graph, p.x);
        r["oracle_Z"] = *oracle;
        r["oracle_status"] = "computed";
    } else {
        r["oracle_status"] = "oracle-infeasible";
    }
    const PartitionValue z = partition_from_determinant(det, !p.graph.has_crossings(), oracle);
    r["sqrt_det"] = z.value;
    r["sign_resolved"] = z.sign_resolved;
    r["crossings"] = static_cast<int>(p.graph.crossings().size());
    if (oracle) {
        const double scale = std::max(std::abs(*oracle), 1e-300);
        r["relative_difference"] = std::abs(*oracle - z.value) / scale;
        r["agreement"] = std::abs(*oracle - z.value) <= 1e-10 * scale;
    }
    return o;
}

Output cmd_inverse(const RunConfig& c)
{
    const Problem p = load(c);
    const auto inverse = invert<double>(kac_ward_operator<double>(p.graph, p.x), c.threads);
    Output o;
    o.report["dim"] = inverse.matrix.rows();
    o.report["rcond"] = inverse.rcond;
    o.report["residual"] = inverse.residual;
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < inverse.matrix.rows(); ++i)
        rows.push_back(complex_vector_json(inverse.matrix.row(i).transpose()));
    o.report["inverse"] = std::move(rows);
    std::ostringstream csv;
    write_dense_csv(csv, inverse.matrix);
    o.csv = csv.str();
    return o;
}

Output cmd_fermion(const RunConfig& c)
{
    const Problem p = load(c);
    if (p.graph.num_edges() > c.oracle_max_edges || !oracle_feasible(p.graph))
        throw Error(ErrorKind::cap_exceeded, "graph is too large for configuration enumeration");
    const Eigen::MatrixXcd inverse = invert<double>(kac_ward_operator<double>(p.graph, p.x), c.threads).matrix;
    Output o;
    if (c.target) {
        require_directed(p.graph, c.edge, "--edge");
        require_directed(p.graph, *c.target, "--target");
        const std::complex<double> f = fermionic_F(p.graph, p.x, c.edge, *c.target);
        o.report["F"] = complex_json(f);
        o.report["inverse"] = complex_json(inverse(c.edge, *c.target));
        o.report["max_abs_error"] = std::abs(std::conj(f) - inverse(c.edge, *c.target));
        return o;
    }
    const Eigen::MatrixXcd f = fermion_matrix(p.graph, p.x);
    o.report["max_abs_error"] = (f.conjugate() - inverse).cwiseAbs().maxCoeff();
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < f.rows(); ++i)
        rows.push_back(complex_vector_json(f.row(i).transpose()));
    o.report["F"] = std::move(rows);
    std::ostringstream csv;
    write_dense_csv(csv, f);
    o.csv = csv.str();
    return o;
}

Output cmd_observable(const RunConfig& c)
{
    const Problem p = load(c);
    const IsoradialLattice lattice = require_lattice(c, p.lattice);
    require_directed(p.graph, c.edge, "--edge");
    const Eigen::MatrixXcd t(kac_ward_operator<double>(p.graph, critical_weights(lattice)));
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(t);
    if (!(lu.rcond() > kSingularRcond))
        throw Error(ErrorKind::singular_operator, "Kac-Ward operator is numerically singular");
    const Eigen::VectorXcd f = observable_column(lattice, lu, c.edge);

    Output o;
    o.report["edge"] = c.edge;
    o.report["source_vertex"] = p.graph.tail(c.edge);
    Json column = Json::object();
    for (int k = 0; k < p.graph.num_edges(); ++k)
        column[std::to_string(k)] = complex_json(f[k]);
    o.report["column"] = std::move(column);

    std::vector<CornerResidual> rows;
    double off_source = 0.0, at_source = 0.0;
    for (int z = 0; z < p.graph.num_vertices(); ++z) {
        const SholomorphicityReport s = sholomorphicity_at(lattice, f, z);
        if (!s.applicable)
            continue;
        rows.insert(rows.end(), s.corners.begin(), s.corners.end());
        double& slot = z == p.graph.tail(c.edge) ? at_source : off_source;
        slot = std::max(slot, s.max_residual);
    }
    const bool source_interior = lattice.is_interior(p.graph.tail(c.edge));
    o.report["source_interior"] = source_interior;
    o.report["max_residual_off_source"] = off_source;
    o.report["residual_at_source"] = source_interior ? Json(at_source) : Json(nullptr);
    o.report["sholomorphic_off_source"] = off_source < c.test_tol;
    Json table = Json::array();
    for (const CornerResidual& row : rows)
        table.push_back({{"vertex", row.vertex}, {"face", row.corner}, {"residual", row.residual}});
    o.report["residuals"] = std::move(table);
    std::ostringstream csv;
    write_residual_csv(csv, rows);
    o.csv = csv.str();
    return o;
}

Output cmd_sholo_check(const RunConfig& c)
{
    const Problem p = load(c);
    const IsoradialLattice lattice = require_lattice(c, p.lattice);
    const SparseOperator<double> t = kac_ward_operator<double>(p.graph, critical_weights(lattice));
    const Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(p.graph.num_edges());

    Output o;
    std::vector<CornerResidual> rows;
    double kernel = 0.0, shol = 0.0, branch_gap = 0.0;
    bool consistent = true;
    int interior = 0;
    for (int z = 0; z < p.graph.num_vertices(); ++z) {
        if (!lattice.is_interior(z) || p.graph.degree(z) == 0)
            continue;
        ++interior;
        const KernelEquivalence check = kernel_equivalence_check(lattice, t, ones, z, c.test_tol);
        kernel = std::max(kernel, check.kernel_residual);
        shol = std::max(shol, check.shol_residual);
        consistent = consistent && check.consistent();
        const SholomorphicityReport a = sholomorphicity_at(lattice, ones, z, Branch::principal);
        const SholomorphicityReport b = sholomorphicity_at(lattice, ones, z, Branch::negated);
        for (std::size_t i = 0; i < a.corners.size(); ++i)
            branch_gap = std::max(branch_gap, std::abs(a.corners[i].residual - b.corners[i].residual));
        rows.insert(rows.end(), a.corners.begin(), a.corners.end());
    }
    o.report["function"] = "constant";
    o.report["interior_vertices"] = interior;
    o.report["max_kernel_residual"] = kernel;
    o.report["max_sholo_residual"] = shol;
    o.report["equivalence_consistent"] = consistent;
    o.report["branch_difference"] = branch_gap;
    o.report["max_angle_sum_defect"] = max_angle_sum_defect(lattice);
    std::ostringstream csv;
    write_residual_csv(csv, rows);
    o.csv = csv.str();
    return o;
}

Output cmd_spectral(const RunConfig& c)
{
    const Problem p = load(c);
    const SparseOperator<double> lambda = transition_matrix<double>(p.graph, p.x);
    const SpectralRadius rho = spectral_radius(lambda);
    Output o;
    o.report["rho_eigen"] = rho.eigen;
    o.report["rho_gelfand16"] = rho.gelfand16;
    o.report["rho_gelfand32"] = rho.gelfand32;
    o.report["norm_B"] = operator_norm(conjugated_matrix(p.graph, lambda, p.x));
    if (p.lattice && !c.uniform_x) {
        const EpsilonBound eps = epsilon_bound(*p.lattice, c.beta);
        o.report["epsilon"] = eps.epsilon;
        o.report["envelope"] = eps.envelope;
        o.report["m"] = eps.m;
        o.report["M"] = eps.M;
    }
    return o;
}

Output cmd_decay(const RunConfig& c)
{
    const Problem p = load(c);
    const IsoradialLattice lattice = require_lattice(c, p.lattice);
    const DecayProfile profile = decay_profile(lattice, c.beta, c.r_max, c.threads);
    Output o;
    o.report["C"] = profile.C;
    o.report["epsilon"] = profile.epsilon.epsilon;
    o.report["envelope"] = profile.epsilon.envelope;
    o.report["norm_B"] = profile.norm_B;
    o.report["slope"] = profile.slope;
    o.report["fitted_epsilon"] = std::exp(profile.slope);
    o.report["inverse_slope"] = profile.inverse_slope;
    o.report["all_under_bound"] = profile.all_under_bound();
    Json rows = Json::array();
    for (const DecayRow& row : profile.rows)
        rows.push_back({{"r", row.r}, {"max_entry", row.max_entry}, {"bound", row.bound}, {"chain", row.chain}});
    o.report["rows"] = std::move(rows);
    Json inverse = Json::array();
    for (const DistanceRow& row : profile.inverse_rows)
        inverse.push_back({{"distance", row.distance}, {"max_entry", row.max_entry}});
    o.report["inverse_by_distance"] = std::move(inverse);
    std::ostringstream csv;
    write_decay_csv(csv, profile);
    o.csv = csv.str();
    return o;
}

Output cmd_certificate(const RunConfig& c)
{
    const Problem p = load(c);
    const IsoradialLattice lattice = require_lattice(c, p.lattice);
    const Certificate cert = criticality_certificate(lattice);
    Output o;
    o.report["certificate"] = certificate_json(cert);
    o.report["rho_critical"] = spectral_radius(transition_matrix<double>(p.graph, critical_weights(lattice))).eigen;
    return o;
}

Output cmd_noninv(const RunConfig& c)
{
    const LatticeKind kind = parse_lattice_kind(c.lattice.empty() ? "square" : c.lattice);
    Output o;
    Json rows = Json::array();
    std::ostringstream csv;
    csv << "radius,support_edges,boundary_edges,ratio,t_phi_sup,sup_bound,phi_norm,norm_lower\n";
    double previous = std::numeric_limits<double>::infinity();
    bool decreasing = true;
    for (int r : c.radii) {
        const NoninvertibilityReport n = noninvertibility_ratio(kind, r);
        decreasing = decreasing && n.ratio < previous;
        previous = n.ratio;
        rows.push_back({{"radius", r},
                        {"support_edges", n.support_edges},
                        {"boundary_edges", n.boundary_edges},
                        {"ratio", n.ratio},
                        {"t_phi_sup", n.t_phi_sup},
                        {"sup_bound", n.sup_bound},
                        {"phi_norm", n.phi_norm},
                        {"norm_lower", n.norm_lower},
                        {"sup_bound_holds", n.sup_bound_holds()},
                        {"norm_bound_holds", n.norm_bound_holds()}});
        csv << r << ',' << n.support_edges << ',' << n.boundary_edges << ',' << format_number(n.ratio) << ','
            << format_number(n.t_phi_sup) << ',' << format_number(n.sup_bound) << ','
            << format_number(n.phi_norm) << ',' << format_number(n.norm_lower) << '\n';
    }
    o.report["lattice"] = to_string(kind);
    o.report["strictly_decreasing"] = decreasing;
    o.report["rows"] = std::move(rows);
    o.csv = csv.str();
    return o;
}

Output cmd_walks(const RunConfig& c)
{
    const Problem p = load(c);
    require_directed(p.graph, c.edge, "--edge");
    const int g = c.target.value_or(c.edge);
    require_directed(p.graph, g, "--target");
    const std::vector<Walk> walks = enumerate_walks(p.graph, p.x, c.edge, g, c.max_length);
    const SparseOperator<double> lambda = transition_matrix<double>(p.graph, p.x);
    std::vector<std::complex<double>> sums(c.max_length + 1, 0.0);
    for (const Walk& w : walks)
        sums[w.length()] += w.weight;
    Output o;
    Json by_length = Json::array();
    double worst = 0.0;
    for (int r = 0; r <= c.max_length; ++r) {
        const std::complex<double> power = walk_series_term<double>(lambda, r).coeff(c.edge, g);
        worst = std::max(worst, std::abs(power - sums[r]));
        by_length.push_back({{"r", r}, {"walk_sum", complex_json(sums[r])}, {"matrix_power", complex_json(power)}});
    }
    o.report["count"] = walks.size();
    o.report["max_abs_difference"] = worst;
    o.report["by_length"] = std::move(by_length);
    std::ostringstream lines;
    for (const Walk& w : walks)
        lines << walk_json(w).dump() << '\n';
    o.csv = lines.str();
    return o;
}

Output cmd_whitney(const RunConfig& c)
{
    const Problem p = load(c);
    const std::vector<Walk> paths = enumerate_closed_paths(p.graph, p.x, c.max_length);
    Output o;
    double worst = 0.0;
    Json rows = Json::array();
    std::ostringstream csv;
    csv << "path,length,crossings,phase_re,phase_im,error\n";
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const WhitneyCheck w = whitney_check(p.graph, paths[i].edges);
        worst = std::max(worst, w.error);
        rows.push_back({{"edges", paths[i].edges},
                        {"crossings", w.crossings},
                        {"phase", complex_json(w.phase)},
                        {"error", w.error}});
        csv << i << ',' << paths[i].length() << ',' << w.crossings << ',' << format_number(w.phase.real()) << ','
            << format_number(w.phase.imag()) << ',' << format_number(w.error) << '\n';
    }
    o.report["paths"] = paths.size();
    o.report["max_phase_error"] = worst;
    o.report["checks"] = std::move(rows);
    o.csv = csv.str();
    return o;
}

void emit(const RunConfig& c, const Output& out)
{
    Json report = header(c);
    report["result"] = out.report;
    std::ostringstream text;
    if (c.format == "json") {
        text << report.dump(2) << '\n';
    } else {
        text << "# " << header(c).dump() << '\n';
        if (out.csv.empty()) {
            text << "key,value\n";
            flatten_csv(text, out.report, "");
        } else {
            text << out.csv;
        }
    }
    if (c.output.empty()) {
        std::cout << text.str();
    } else {
        std::ofstream file(c.output);
        if (!file)
            throw Error(ErrorKind::invalid_argument, "cannot write " + c.output);
        file << text.str();
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Kac-Ward operator toolkit"};
    app.require_subcommand(1);
    RunConfig config;

    auto common = [&](CLI::App* sub) {
        auto* graph =
            sub->add_option("--graph", config.graph_path, "graph or lattice JSON file")->check(CLI::ExistingFile);
        auto* lattice = sub->add_option("--lattice", config.lattice, "square, tri or hex");
        graph->excludes(lattice);
        sub->add_option("--radius", config.radius, "lattice box radius")->check(CLI::PositiveNumber);
        sub->add_option("--beta", config.beta, "inverse temperature in (0, 1]");
        sub->add_option("--x", config.uniform_x, "uniform edge weight");
        sub->add_option("--threads", config.threads, "worker threads (default KW_THREADS or 1)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--seed", config.seed, "seed recorded in the report");
        sub->add_option("--solve-tol", config.solve_tol, "solver tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--test-tol", config.test_tol, "pass/fail tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--format", config.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--output", config.output, "output file (default stdout)");
    };

    struct Entry
    {
        const char* name;
        const char* help;
        Output (*run)(const RunConfig&);
    };
    const Entry entries[] = {
        {"z", "partition function from det T and the even-subgraph oracle", cmd_z},
        {"inverse", "dense inverse Kac-Ward operator", cmd_inverse},
        {"fermion", "fermionic generating function by enumeration", cmd_fermion},
        {"observable", "observable column S^-1 T^-1 i_{-e} with s-holomorphicity residuals", cmd_observable},
        {"sholo-check", "kernel of T S on the constant function", cmd_sholo_check},
        {"spectral", "spectral radius, conjugated norm and epsilon", cmd_spectral},
        {"decay", "supercritical decay of Lambda^r and of the inverse", cmd_decay},
        {"certificate", "criticality certificate via xi", cmd_certificate},
        {"noninv", "critical non-invertibility ratios", cmd_noninv},
        {"walks", "enumerated walk sums against matrix powers", cmd_walks},
        {"whitney", "Whitney phase check on closed paths", cmd_whitney},
    };
    std::vector<std::pair<CLI::App*, const Entry*>> subs;
    for (const Entry& entry : entries) {
        CLI::App* sub = app.add_subcommand(entry.name, entry.help);
        common(sub);
        subs.emplace_back(sub, &entry);
        const std::string name = entry.name;
        if (name == "z" || name == "fermion")
            sub->add_option("--oracle-max-edges", config.oracle_max_edges, "largest graph for enumeration");
        if (name == "fermion" || name == "observable" || name == "walks") {
            sub->add_option("--edge", config.edge, "directed edge index");
            sub->add_option("--target", config.target, "second directed edge index");
        }
        if (name == "walks" || name == "whitney")
            sub->add_option("--max-length", config.max_length, "longest walk")->check(CLI::NonNegativeNumber);
        if (name == "decay")
            sub->add_option("--rmax", config.r_max, "largest power");
        if (name == "noninv")
            sub->add_option("--radii", config.radii, "box radii")->delimiter(',');
    }

    try {
        config.threads = threads_from_environment();
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        return app.exit(err) == 0 ? 0 : 2;
    } catch (const Error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    }

    try {
        for (const auto& [sub, entry] : subs)
            if (sub->parsed()) {
                config.command = entry->name;
                emit(config, entry->run(config));
            }
    } catch (const Error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return is_numerical(err.kind()) ? 3 : 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 3;
    }
    return 0;
}
