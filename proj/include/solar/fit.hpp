#pragma once
#include <optional>
#include <string>
#include <vector>
#include <solar/dual_solver.hpp>
#include <solar/expofam.hpp>
#include <solar/fast_solvers.hpp>
#include <solar/penalty.hpp>
#include <solar/reflection_group.hpp>

namespace solar {

enum class FitMethod { automatic, taut_string, pava, soft_threshold, dual_cd };

inline FitMethod parse_fit_method(std::string_view s)
{
    if (s == "auto") return FitMethod::automatic;
    if (s == "taut-string") return FitMethod::taut_string;
    if (s == "pava") return FitMethod::pava;
    if (s == "soft-threshold") return FitMethod::soft_threshold;
    if (s == "dual-cd") return FitMethod::dual_cd;
    throw Error("unknown fit method '" + std::string(s) + "'");
}

inline std::string_view to_string(FitMethod m)
{
    switch (m) {
        case FitMethod::automatic: return "auto";
        case FitMethod::taut_string: return "taut-string";
        case FitMethod::pava: return "pava";
        case FitMethod::soft_threshold: return "soft-threshold";
        case FitMethod::dual_cd: return "dual-cd";
    }
    return "?";
}

struct FitOptions
{
    FitMethod method = FitMethod::automatic;
    SolveOptions solve{1e-14, 1e-12, 1000000};
    std::size_t group_cap = 100000;
    bool change_points = true;
    double change_point_tol = 1e-8;
};

/**
 * Everything `fit` learned: the least-squares fit U(x), the reduced fit
 * T(x) = grad phi*(U(x)), the group that licensed the reduction, and the
 * optimality diagnostics of U(x).
 */
struct FitReport
{
    std::string family;
    std::string penalty;
    FitMethod method = FitMethod::dual_cd;
    GroupVerdict group_verdict = GroupVerdict::undetermined;
    GroupClass group_class = GroupClass::orthogonal_fallback;
    std::optional<std::size_t> group_order;   // empty unless finite and below 2^64

    Vector u;
    std::optional<Vector> t;
    std::vector<long> boundary_coordinates;

    bool converged = true;
    std::size_t sweeps = 0;
    std::optional<double> kkt_residual;
    /// h_C(U) - <x - U, U>; zero at the exact solution
    double fenchel_gap = 0.0;
    /// summands j (0-based) with |<r_j, T(x)>| <= change_point_tol
    std::optional<std::vector<Index>> flat_summands;
    std::vector<TraceRecord> trace;
};

namespace detail {

inline bool single_lambda(const PenaltySpec& spec) { return spec.lambdas.size() == 1; }

inline FitMethod pick_method(const PenaltySpec& spec, FitMethod requested)
{
    const bool st = spec.kind == PenaltyKind::lasso && single_lambda(spec);
    const bool ts = spec.kind == PenaltyKind::fused_graph && single_lambda(spec) && is_chain(spec) && spec.n >= 2;
    const bool pv = spec.kind == PenaltyKind::isotonic_graph && is_chain(spec) && spec.n >= 2;
    switch (requested) {
        case FitMethod::automatic:
            if (st) return FitMethod::soft_threshold;
            if (ts) return FitMethod::taut_string;
            if (pv) return FitMethod::pava;
            return FitMethod::dual_cd;
        case FitMethod::soft_threshold:
            if (!st) throw Error("soft-threshold needs a lasso penalty with a single lambda");
            return requested;
        case FitMethod::taut_string:
            if (!ts) throw Error("taut-string needs a chain fused penalty with a single lambda");
            return requested;
        case FitMethod::pava:
            if (!pv) throw Error("pava needs a chain isotonic penalty");
            return requested;
        case FitMethod::dual_cd: return requested;
    }
    return FitMethod::dual_cd;
}

} // namespace detail

/// Least-squares fit U(x) with the chosen method; fills the solver diagnostics of `rep`.
inline Vector least_squares_fit(const PenaltySpec& spec, const SolarBase& base, const Eigen::Ref<const Vector>& x,
                                const FitOptions& opts, FitReport& rep, bool trace = false)
{
    rep.method = detail::pick_method(spec, opts.method);
    switch (rep.method) {
        case FitMethod::soft_threshold: return soft_threshold(x, spec.lambdas.front());
        case FitMethod::taut_string: return taut_string(x, spec.lambdas.front());
        case FitMethod::pava: return pava(x);
        default: break;
    }
    SolveOptions so = opts.solve;
    so.trace_enabled = trace;
    auto res = solve_min_norm(x, base, so);
    rep.converged = res.converged;
    rep.sweeps = res.sweeps;
    rep.kkt_residual = res.kkt_residual;
    rep.trace = std::move(res.trace);
    return res.fit;
}

/**
 * End-to-end estimator: refuse unless the generator is invariant under G(B),
 * solve the least-squares problem once, and map it through grad phi*.
 * Throws InvarianceRefusal; a boundary dual fit yields a report without `t`
 * and with the offending coordinates listed.
 */
inline FitReport fit(const GeneratorFamily& family, const PenaltySpec& spec, const Eigen::Ref<const Vector>& x,
                     const FitOptions& opts = {}, bool trace = false)
{
    if (x.size() != spec.n) throw DimensionMismatch("fit", spec.n, x.size());
    const SolarBase base = build_penalty(spec);
    const GroupReport group = generate_group(base, opts.group_cap);

    FitReport rep;
    rep.family = std::string(family.name());
    rep.penalty = std::string(to_string(spec.kind));
    rep.group_verdict = group.verdict;
    rep.group_class = group.classification;
    if (group.is_finite() && !group.order_overflow) rep.group_order = group.order;

    if (!check_invariance(family, group)) {
        throw InvarianceRefusal(std::string(family.name()) + " generator is not invariant under the "
                                + std::string(to_string(group.classification)) + " reflection group of the "
                                + rep.penalty + " penalty; the least-squares reduction does not apply");
    }

    rep.u = least_squares_fit(spec, base, x, opts, rep, trace);
    const Vector resid = x - rep.u;
    rep.fenchel_gap = support_function(base, rep.u, 1e-9 * (1.0 + rep.u.cwiseAbs().maxCoeff())) - resid.dot(rep.u);

    rep.boundary_coordinates = family.boundary_coordinates(rep.u);
    if (!rep.boundary_coordinates.empty()) return rep;
    rep.t = reduce(family, rep.u);

    if (opts.change_points) {
        std::vector<Index> flat;
        for (Index j = 0; j < base.size(); ++j) {
            if (std::abs(base.dot(j, *rep.t)) <= opts.change_point_tol) flat.push_back(j);
        }
        rep.flat_summands = std::move(flat);
    }
    return rep;
}

} // namespace solar
