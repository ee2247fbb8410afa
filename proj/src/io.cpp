#include "kacward/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace kacward {

namespace {

[[noreturn]] void structure_error(const std::string& path, const std::string& what)
{
    throw Error(ErrorKind::parse, path + ": " + what);
}

double number_at(const Json& node, const std::string& path)
{
    if (!node.is_number())
        structure_error(path, "expected a number");
    const double value = node.get<double>();
    if (!std::isfinite(value))
        structure_error(path, "expected a finite number");
    return value;
}

const Json& array_member(const Json& root, const char* key, bool required)
{
    static const Json missing;
    const auto it = root.find(key);
    if (it == root.end()) {
        if (required)
            structure_error("/", std::string("missing \"") + key + "\"");
        return missing;
    }
    if (!it->is_array())
        structure_error(std::string("/") + key, "expected an array");
    return *it;
}

} // namespace

GraphInput parse_graph_json(const std::string& text)
{
    Json root;
    try {
        root = Json::parse(text);
    } catch (const nlohmann::json::parse_error& err) {
        // The message already carries "line L, column C"; drop the exception tag in front of it.
        std::string message = err.what();
        if (const auto at = message.find("line "); at != std::string::npos)
            message.erase(0, at);
        throw Error(ErrorKind::parse, message);
    }
    if (!root.is_object())
        structure_error("/", "expected an object");

    std::vector<Point> vertices;
    const Json& vs = array_member(root, "vertices", true);
    for (std::size_t i = 0; i < vs.size(); ++i) {
        const std::string path = "/vertices/" + std::to_string(i);
        if (!vs[i].is_array() || vs[i].size() != 2)
            structure_error(path, "expected [x, y]");
        vertices.emplace_back(number_at(vs[i][0], path + "/0"), number_at(vs[i][1], path + "/1"));
    }

    std::vector<std::array<int, 2>> edges;
    const Json& es = array_member(root, "edges", true);
    for (std::size_t k = 0; k < es.size(); ++k) {
        const std::string path = "/edges/" + std::to_string(k);
        if (!es[k].is_array() || es[k].size() != 2 || !es[k][0].is_number_integer() ||
            !es[k][1].is_number_integer())
            structure_error(path, "expected [i, j] with integer vertex indices");
        const auto u = es[k][0].get<long long>(), v = es[k][1].get<long long>();
        const auto n = static_cast<long long>(vertices.size());
        if (u < 0 || v < 0 || u >= n || v >= n)
            throw Error(ErrorKind::invalid_graph, path + ": vertex index out of range");
        edges.push_back({static_cast<int>(u), static_cast<int>(v)});
    }

    GraphInput input;
    const Json& ws = array_member(root, "weights", false);
    if (!ws.is_null()) {
        if (ws.size() != edges.size())
            throw Error(ErrorKind::missing_weight, "/weights: expected one weight per edge");
        Eigen::VectorXd w(static_cast<Eigen::Index>(ws.size()));
        for (std::size_t k = 0; k < ws.size(); ++k) {
            w[static_cast<Eigen::Index>(k)] = number_at(ws[k], "/weights/" + std::to_string(k));
            if (!(w[static_cast<Eigen::Index>(k)] > 0.0))
                throw Error(ErrorKind::missing_weight, "/weights/" + std::to_string(k) + ": weights must be positive");
        }
        input.weights = std::move(w);
    }

    const Json& ts = array_member(root, "theta", false);
    if (!ts.is_null()) {
        std::vector<double> theta;
        for (std::size_t k = 0; k < ts.size(); ++k)
            theta.push_back(number_at(ts[k], "/theta/" + std::to_string(k)));
        std::optional<double> circumradius;
        if (const auto it = root.find("circumradius"); it != root.end())
            circumradius = number_at(*it, "/circumradius");
        input.lattice = from_rhombic_data(vertices, edges, std::move(theta), circumradius);
        input.graph = input.lattice->graph;
    } else {
        input.graph = PlanarGraph(std::move(vertices), std::move(edges));
    }
    return input;
}

GraphInput read_graph_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::parse, "cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_graph_json(buffer.str());
    } catch (const Error& err) {
        throw Error(err.kind(), path + ": " + err.what());
    }
}

Json graph_json(const PlanarGraph& graph, const Eigen::VectorXd* weights)
{
    Json out;
    Json vs = Json::array();
    for (const Point& p : graph.vertices())
        vs.push_back({p.real(), p.imag()});
    Json es = Json::array();
    for (const auto& [u, v] : graph.edges())
        es.push_back({u, v});
    out["vertices"] = std::move(vs);
    out["edges"] = std::move(es);
    if (weights)
        out["weights"] = std::vector<double>(weights->data(), weights->data() + weights->size());
    return out;
}

Json complex_json(std::complex<double> z)
{
    return Json::array({z.real(), z.imag()});
}

Json complex_vector_json(const Eigen::VectorXcd& v)
{
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(complex_json(v[i]));
    return out;
}

std::string format_number(double value)
{
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

void write_triplets_csv(std::ostream& out, const SparseOperator<double>& a)
{
    out << "row,col,re,im\n";
    for (int row = 0; row < a.outerSize(); ++row)
        for (SparseOperator<double>::InnerIterator it(a, row); it; ++it)
            out << it.row() << ',' << it.col() << ',' << format_number(it.value().real()) << ','
                << format_number(it.value().imag()) << '\n';
}

void write_dense_csv(std::ostream& out, const Eigen::MatrixXcd& a)
{
    out << "dim," << a.rows() << ",layout,row-major re im pairs\n";
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (j)
                out << ',';
            out << format_number(a(i, j).real()) << ',' << format_number(a(i, j).imag());
        }
        out << '\n';
    }
}

Json walk_json(const Walk& walk)
{
    Json out;
    out["edges"] = walk.edges;
    out["weight"] = complex_json(walk.weight);
    out["winding"] = walk.winding;
    return out;
}

Json certificate_json(const Certificate& cert)
{
    Json out;
    Json xi = Json::object();
    for (std::size_t v = 0; v < cert.xi.size(); ++v)
        xi[std::to_string(v)] = cert.xi[v];
    Json weights = Json::object();
    for (Eigen::Index d = 0; d < cert.xhat.size(); ++d)
        weights[std::to_string(d)] = cert.xhat[d];
    out["xi"] = std::move(xi);
    out["weights"] = std::move(weights);
    out["shells"] = cert.shells;
    out["max_xi"] = cert.max_xi();
    out["certified"] = cert.certified();
    out["factorization_error"] = cert.factorization_error;
    return out;
}

void write_decay_csv(std::ostream& out, const DecayProfile& profile)
{
    out << "r,max_entry,bound\n";
    for (const DecayRow& row : profile.rows)
        out << row.r << ',' << format_number(row.max_entry) << ',' << format_number(row.bound) << '\n';
}

void write_residual_csv(std::ostream& out, const std::vector<CornerResidual>& rows)
{
    out << "vertex,face,residual\n";
    for (const CornerResidual& row : rows)
        out << row.vertex << ',' << row.corner << ',' << format_number(row.residual) << '\n';
}

} // namespace kacward
