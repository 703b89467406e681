#pragma once
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>
#include <solar/fit.hpp>
#include <solar/oracle.hpp>
#include <solar/penalty.hpp>
#include <solar/reflection_group.hpp>

namespace solar::io {

using json = nlohmann::ordered_json;

class IoError : public Error
{
public:
    using Error::Error;
};

inline json vector_json(const Eigen::Ref<const Vector>& v)
{
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline json matrix_json(const Matrix& m)
{
    json a = json::array();
    for (Index i = 0; i < m.rows(); ++i) a.push_back(vector_json(m.row(i).transpose()));
    return a;
}

/// {"kind", "n", "lambda", "edges", "matrix"}; edges are 1-based.
inline PenaltySpec penalty_spec_from_json(const json& j)
{
    try {
        PenaltySpec spec;
        spec.kind = parse_penalty_kind(j.at("kind").get<std::string>());
        spec.n = j.at("n").get<Index>();
        if (j.contains("lambda") && !j["lambda"].is_null()) {
            const auto& l = j["lambda"];
            if (l.is_array()) spec.lambdas = l.get<std::vector<double>>();
            else spec.lambdas = {l.get<double>()};
        }
        if (j.contains("edges") && !j["edges"].is_null()) {
            std::vector<Edge> edges;
            for (const auto& e : j["edges"]) {
                if (!e.is_array() || e.size() != 2) throw InvalidPenalty("edges must be [i, j] pairs");
                edges.emplace_back(e[0].get<Index>() - 1, e[1].get<Index>() - 1);
            }
            spec.edges = std::move(edges);
        }
        if (j.contains("matrix") && !j["matrix"].is_null()) {
            const auto& rows = j["matrix"];
            Matrix m(static_cast<Index>(rows.size()), spec.n);
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (rows[r].size() != static_cast<std::size_t>(spec.n)) {
                    throw InvalidPenalty("matrix rows must have n entries");
                }
                for (Index c = 0; c < spec.n; ++c) m(static_cast<Index>(r), c) = rows[r][static_cast<std::size_t>(c)].get<double>();
            }
            spec.matrix = std::move(m);
        }
        return spec;
    } catch (const json::exception& e) {
        throw InvalidPenalty(std::string("penalty JSON: ") + e.what());
    }
}

inline json to_json(const PenaltySpec& spec)
{
    json j;
    j["kind"] = std::string(to_string(spec.kind));
    j["n"] = spec.n;
    if (spec.lambdas.size() == 1) j["lambda"] = spec.lambdas.front();
    else if (!spec.lambdas.empty()) j["lambda"] = spec.lambdas;
    if (spec.edges) {
        json e = json::array();
        for (const auto& [a, b] : *spec.edges) e.push_back({a + 1, b + 1});
        j["edges"] = e;
    }
    if (spec.matrix) j["matrix"] = matrix_json(*spec.matrix);
    return j;
}

/// Elements are listed only up to `max_elements` (order 1000 by default).
inline json to_json(const GroupReport& rep, std::size_t max_elements = 1000)
{
    json j;
    j["verdict"] = std::string(to_string(rep.verdict));
    j["classification"] = std::string(to_string(rep.classification));
    // exact order, or null when infinite, undetermined or beyond 64 bits
    j["order"] = rep.is_finite() && !rep.order_overflow ? json(rep.order) : json(nullptr);
    if (rep.is_finite()) j["log10_order"] = rep.log10_order;
    j["full_product"] = rep.full_product;
    j["dim"] = rep.dim;
    j["generators"] = rep.generators.size();
    j["inner_products"] = matrix_json(rep.inner_products);
    j["angle_ratio"] = matrix_json(rep.angle_ratio);
    if (rep.irrational_pair) j["irrational_pair"] = {rep.irrational_pair->first + 1, rep.irrational_pair->second + 1};
    if (!rep.components.empty()) {
        json c = json::array();
        for (const auto& comp : rep.components) {
            json one = json::array();
            for (Index i : comp) one.push_back(i + 1);
            c.push_back(one);
        }
        j["components"] = c;
    }
    if (rep.is_finite() && !rep.elements.empty() && rep.order <= max_elements) {
        json e = json::array();
        for (const auto& g : rep.elements) e.push_back(matrix_json(g));
        j["elements"] = e;
    }
    return j;
}

inline json to_json(const FitReport& rep)
{
    json j;
    j["family"] = rep.family;
    j["penalty"] = rep.penalty;
    j["method"] = std::string(to_string(rep.method));
    j["group"] = {{"verdict", std::string(to_string(rep.group_verdict))},
                  {"classification", std::string(to_string(rep.group_class))},
                  {"order", rep.group_verdict == GroupVerdict::finite && rep.group_order ? json(*rep.group_order) : json(nullptr)}};
    j["u"] = vector_json(rep.u);
    j["t"] = rep.t ? vector_json(*rep.t) : json(nullptr);
    json bc = json::array();
    for (long i : rep.boundary_coordinates) bc.push_back(i + 1);
    j["boundary_coordinates"] = bc;
    j["converged"] = rep.converged;
    j["sweeps"] = rep.sweeps;
    j["kkt_residual"] = rep.kkt_residual ? json(*rep.kkt_residual) : json(nullptr);
    j["fenchel_gap"] = std::isfinite(rep.fenchel_gap) ? json(rep.fenchel_gap) : json(nullptr);
    if (rep.flat_summands) {
        json f = json::array();
        for (Index i : *rep.flat_summands) f.push_back(i + 1);
        j["flat_summands"] = f;
    }
    return j;
}

inline json to_json(const SuiteReport& rep)
{
    json j;
    j["seed"] = rep.seed;
    j["passed"] = rep.passed();
    json checks = json::array();
    for (const auto& c : rep.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    j["checks"] = checks;
    return j;
}

inline std::vector<std::vector<std::string>> read_csv_rows(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

/// Headerless single-column CSV of reals.
inline Vector read_signal_csv(const std::string& path)
{
    const auto rows = read_csv_rows(path);
    Vector x(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != 1) throw IoError(path + ": line " + std::to_string(i + 1) + " must hold one value");
        try {
            std::size_t used = 0;
            x[static_cast<Index>(i)] = std::stod(rows[i][0], &used);
            if (rows[i][0].find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw IoError(path + ": line " + std::to_string(i + 1) + " is not a number");
        }
    }
    if (x.size() == 0) throw IoError(path + ": no data");
    return x;
}

/// Two-column CSV of 1-based vertex pairs, returned 0-based.
inline std::vector<Edge> read_edges_csv(const std::string& path)
{
    std::vector<Edge> edges;
    const auto rows = read_csv_rows(path);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != 2) throw IoError(path + ": line " + std::to_string(i + 1) + " must hold two vertices");
        try {
            edges.emplace_back(std::stol(rows[i][0]) - 1, std::stol(rows[i][1]) - 1);
        } catch (const std::exception&) {
            throw IoError(path + ": line " + std::to_string(i + 1) + " is not an integer pair");
        }
    }
    return edges;
}

} // namespace solar::io
