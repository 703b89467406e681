#pragma once
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>
#include <solar/error.hpp>
#include <solar/solar_base.hpp>

namespace solar {

enum class PenaltyKind
{
    lasso,
    nonneg,
    fused_graph,
    isotonic_graph,
    nearly_isotonic_graph,
    trend_filter,
    sparse_fused,
    custom_matrix,
};

using Edge = std::pair<Index, Index>;

/**
 * High-level description of one of the named penalties.
 *
 * Edges are 0-based here (files use 1-based indices). An absent edge list on a
 * graph penalty means the chain 0-1-...-(n-1); an explicitly empty one is an
 * error. For isotonic and nearly-isotonic graphs an edge (i, j) asks for
 * theta_i <= theta_j.
 *
 * `lambdas` is either a single value broadcast over all summands or one value
 * per summand. sparse-fused takes {lambda_lasso, lambda_fused}. nonneg with no
 * lambda is the hard constraint theta >= 0; isotonic-graph ignores lambdas.
 */
struct PenaltySpec
{
    PenaltyKind kind = PenaltyKind::lasso;
    Index n = 0;
    std::vector<double> lambdas;
    std::optional<std::vector<Edge>> edges;
    std::optional<Matrix> matrix;
};

inline std::string_view to_string(PenaltyKind k)
{
    switch (k) {
        case PenaltyKind::lasso: return "lasso";
        case PenaltyKind::nonneg: return "nonneg";
        case PenaltyKind::fused_graph: return "fused-graph";
        case PenaltyKind::isotonic_graph: return "isotonic-graph";
        case PenaltyKind::nearly_isotonic_graph: return "nearly-isotonic-graph";
        case PenaltyKind::trend_filter: return "trend-filter";
        case PenaltyKind::sparse_fused: return "sparse-fused";
        case PenaltyKind::custom_matrix: return "custom-matrix";
    }
    return "unknown";
}

/// Accepts the canonical names plus the "-chain" shorthands used on the command line.
inline PenaltyKind parse_penalty_kind(std::string_view s)
{
    if (s == "lasso") return PenaltyKind::lasso;
    if (s == "nonneg") return PenaltyKind::nonneg;
    if (s == "fused-graph" || s == "fused-chain" || s == "fused") return PenaltyKind::fused_graph;
    if (s == "isotonic-graph" || s == "isotonic-chain" || s == "isotonic") return PenaltyKind::isotonic_graph;
    if (s == "nearly-isotonic-graph" || s == "nearly-isotonic-chain" || s == "nearly-isotonic") {
        return PenaltyKind::nearly_isotonic_graph;
    }
    if (s == "trend-filter") return PenaltyKind::trend_filter;
    if (s == "sparse-fused") return PenaltyKind::sparse_fused;
    if (s == "custom-matrix") return PenaltyKind::custom_matrix;
    throw InvalidPenalty("unknown penalty kind '" + std::string(s) + "'");
}

inline bool is_graph_kind(PenaltyKind k)
{
    return k == PenaltyKind::fused_graph || k == PenaltyKind::isotonic_graph
        || k == PenaltyKind::nearly_isotonic_graph || k == PenaltyKind::sparse_fused;
}

inline std::vector<Edge> chain_edges(Index n)
{
    std::vector<Edge> out;
    for (Index i = 0; i + 1 < n; ++i) out.emplace_back(i, i + 1);
    return out;
}

namespace detail {

inline std::vector<Edge> resolve_edges(const PenaltySpec& spec)
{
    if (!spec.edges) return chain_edges(spec.n);
    if (spec.edges->empty()) throw InvalidPenalty(std::string(to_string(spec.kind)) + ": empty edge set");
    for (const auto& [i, j] : *spec.edges) {
        if (i < 0 || j < 0 || i >= spec.n || j >= spec.n) {
            throw InvalidPenalty("edge references a vertex outside [1, n]");
        }
        if (i == j) throw InvalidPenalty("self-loop edges have no difference vector");
    }
    return *spec.edges;
}

/// Broadcast `lambdas` to m summands.
inline std::vector<double> per_summand(const std::vector<double>& lambdas, std::size_t m, std::string_view what)
{
    if (lambdas.empty()) throw InvalidPenalty(std::string(what) + ": lambda is required");
    for (double l : lambdas) {
        if (!(l >= 0.0) || std::isinf(l)) throw InvalidPenalty(std::string(what) + ": lambda must be finite and >= 0");
    }
    if (lambdas.size() == 1) return std::vector<double>(m, lambdas.front());
    if (lambdas.size() != m) {
        throw InvalidPenalty(std::string(what) + ": expected 1 or " + std::to_string(m) + " lambda values");
    }
    return lambdas;
}

inline SolarBase difference_base(Index n, const std::vector<Edge>& edges, const std::vector<ExtInterval>& ivs)
{
    std::vector<SolarBase::sparse_col_t> cols;
    cols.reserve(edges.size());
    for (const auto& [i, j] : edges) cols.push_back({{i, -1.0}, {j, 1.0}});
    return SolarBase(n, cols, ivs);
}

inline SolarBase coordinate_base(Index n, const std::vector<ExtInterval>& ivs)
{
    std::vector<SolarBase::sparse_col_t> cols;
    cols.reserve(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) cols.push_back({{j, 1.0}});
    return SolarBase(n, cols, ivs);
}

} // namespace detail

/**
 * Build the base representation of a named penalty.
 *
 * User-facing lambdas follow the matrix form lambda * ||D theta||_1: a row d of
 * D becomes the unit vector d / ||d|| with interval lambda * ||d|| * [-1, 1], so
 * the support function reproduces the conventional penalty value.
 */
inline SolarBase build_penalty(const PenaltySpec& spec)
{
    const Index n = spec.n;
    if (n < 1) throw InvalidPenalty("penalty dimension n must be >= 1");
    const double sqrt2 = std::sqrt(2.0);

    switch (spec.kind) {
        case PenaltyKind::lasso: {
            auto lam = detail::per_summand(spec.lambdas, static_cast<std::size_t>(n), "lasso");
            std::vector<ExtInterval> ivs;
            for (double l : lam) ivs.push_back(ExtInterval::symmetric(l));
            return detail::coordinate_base(n, ivs);
        }
        case PenaltyKind::nonneg: {
            std::vector<ExtInterval> ivs;
            if (spec.lambdas.empty()) {
                ivs.assign(static_cast<std::size_t>(n), ExtInterval::nonpositive());
            } else {
                for (double l : detail::per_summand(spec.lambdas, static_cast<std::size_t>(n), "nonneg")) {
                    ivs.emplace_back(-l, 0.0);
                }
            }
            return detail::coordinate_base(n, ivs);
        }
        case PenaltyKind::fused_graph: {
            const auto edges = detail::resolve_edges(spec);
            if (edges.empty()) throw InvalidPenalty("fused-graph: empty edge set");
            std::vector<ExtInterval> ivs;
            for (double l : detail::per_summand(spec.lambdas, edges.size(), "fused-graph")) {
                ivs.push_back(ExtInterval::symmetric(l * sqrt2));
            }
            return detail::difference_base(n, edges, ivs);
        }
        case PenaltyKind::isotonic_graph: {
            const auto edges = detail::resolve_edges(spec);
            if (edges.empty()) throw InvalidPenalty("isotonic-graph: empty edge set");
            return detail::difference_base(n, edges, std::vector<ExtInterval>(edges.size(), ExtInterval::nonpositive()));
        }
        case PenaltyKind::nearly_isotonic_graph: {
            const auto edges = detail::resolve_edges(spec);
            if (edges.empty()) throw InvalidPenalty("nearly-isotonic-graph: empty edge set");
            std::vector<ExtInterval> ivs;
            for (double l : detail::per_summand(spec.lambdas, edges.size(), "nearly-isotonic-graph")) {
                ivs.emplace_back(-l * sqrt2, 0.0);
            }
            return detail::difference_base(n, edges, ivs);
        }
        case PenaltyKind::trend_filter: {
            if (n < 3) throw InvalidPenalty("trend-filter: n must be >= 3");
            const auto m = static_cast<std::size_t>(n - 2);
            const double sqrt6 = std::sqrt(6.0);
            std::vector<SolarBase::sparse_col_t> cols;
            std::vector<ExtInterval> ivs;
            const auto lam = detail::per_summand(spec.lambdas, m, "trend-filter");
            for (Index j = 0; j + 2 < n; ++j) {
                cols.push_back({{j, 1.0}, {j + 1, -2.0}, {j + 2, 1.0}});
                ivs.push_back(ExtInterval::symmetric(lam[static_cast<std::size_t>(j)] * sqrt6));
            }
            return SolarBase(n, cols, ivs);
        }
        case PenaltyKind::sparse_fused: {
            if (spec.lambdas.size() != 2) throw InvalidPenalty("sparse-fused: expected lambda = [lasso, fused]");
            PenaltySpec l1{PenaltyKind::lasso, n, {spec.lambdas[0]}, std::nullopt, std::nullopt};
            PenaltySpec tv{PenaltyKind::fused_graph, n, {spec.lambdas[1]}, spec.edges, std::nullopt};
            if (n < 2 && !spec.edges) return build_penalty(l1);
            return sum_penalties(build_penalty(l1), build_penalty(tv));
        }
        case PenaltyKind::custom_matrix: {
            if (!spec.matrix) throw InvalidPenalty("custom-matrix: matrix is required");
            const Matrix& d = *spec.matrix;
            if (d.cols() != n) throw InvalidPenalty("custom-matrix: matrix must have n columns");
            if (d.rows() < 1) throw InvalidPenalty("custom-matrix: matrix has no rows");
            const auto lam = detail::per_summand(spec.lambdas, static_cast<std::size_t>(d.rows()), "custom-matrix");
            std::vector<ExtInterval> ivs;
            for (Index i = 0; i < d.rows(); ++i) {
                const double nrm = d.row(i).norm();
                if (!(nrm > 0.0)) throw InvalidPenalty("custom-matrix: row " + std::to_string(i + 1) + " is zero");
                ivs.push_back(ExtInterval::symmetric(lam[static_cast<std::size_t>(i)] * nrm));
            }
            return SolarBase::from_dense(d.transpose(), ivs);
        }
    }
    throw InvalidPenalty("unhandled penalty kind");
}

/// True when the spec is a graph penalty on the path 0-1-...-(n-1) in order.
inline bool is_chain(const PenaltySpec& spec)
{
    if (!spec.edges) return true;
    const auto chain = chain_edges(spec.n);
    return *spec.edges == chain;
}

} // namespace solar
