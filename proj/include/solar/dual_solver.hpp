#pragma once
#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <type_traits>
#include <vector>
#include <solar/error.hpp>
#include <solar/solar_base.hpp>

namespace solar {

/**
 * Coordinate-descent state for min || x - sum_j alpha_j r_j ||, alpha_j in I_j.
 *
 * `y` is the fitted value x - B alpha, kept up to date incrementally.
 */
struct DualState
{
    Vector x;
    Vector alpha;
    Vector y;
    double norm_sq = 0.0;
    std::size_t sweep = 0;

    /// alpha_j = 0 where 0 is in I_j, else the endpoint nearest 0.
    static DualState initial(const SolarBase& base, const Eigen::Ref<const Vector>& x)
    {
        Vector alpha(base.size());
        for (Index j = 0; j < base.size(); ++j) alpha[j] = base.interval(j).nearest_to_zero();
        return from_alpha(base, x, alpha);
    }

    static DualState from_alpha(const SolarBase& base, const Eigen::Ref<const Vector>& x,
                                const Eigen::Ref<const Vector>& alpha)
    {
        if (x.size() != base.dim()) throw DimensionMismatch("DualState", base.dim(), x.size());
        if (alpha.size() != base.size()) throw DimensionMismatch("DualState alpha", base.size(), alpha.size());
        for (Index j = 0; j < base.size(); ++j) {
            if (!base.interval(j).contains(alpha[j])) throw Error("DualState: alpha is not dual feasible");
        }
        DualState s;
        s.x = x;
        s.alpha = alpha;
        s.refresh(base);
        return s;
    }

    void refresh(const SolarBase& base)
    {
        y = x - base.combine(alpha);
        norm_sq = y.squaredNorm();
    }
};

/// One coordinate update, as seen by a trace observer.
struct TraceRecord
{
    std::size_t sweep = 0;
    Index j = 0;
    double alpha_old = 0.0;
    double alpha_new = 0.0;
    /// y_new = y_old + c (S_r y_old - y_old)
    double c = 0.0;
    double norm_y = 0.0;
};

enum class SweepOrder { cyclic, cyclic_shuffled_once };

struct SolveOptions
{
    double tol = 1e-10;          // relative decrease of ||y||^2 over a sweep
    double kkt_tol = 1e-10;      // max coordinate movement over a sweep
    std::size_t max_sweeps = 100000;
    bool trace_enabled = false;
    SweepOrder sweep_order = SweepOrder::cyclic;
    unsigned long long shuffle_seed = 0;
    std::size_t refresh_every = 64;
};

struct MinNormResult
{
    Vector fit;                 // U(x)
    DualState state;
    bool converged = false;
    std::size_t sweeps = 0;
    double kkt_residual = 0.0;
    std::vector<TraceRecord> trace;
};

/**
 * Exact minimizer over alpha_j of || x - sum_k alpha_k r_k ||:
 * alpha_j <- clip(alpha_j + <r_j, y>, I_j). Returns the movement of alpha_j.
 */
inline double coordinate_update(DualState& state, Index j, const SolarBase& base, TraceRecord* rec = nullptr)
{
    const auto& iv = base.interval(j);
    const double s = base.dot(j, state.y);
    const double old = state.alpha[j];
    const double now = iv.clip(old + s);
    const double delta = now - old;
    if (delta != 0.0) {
        state.alpha[j] = now;
        base.axpy(j, -delta, state.y);
        // ||y - delta r||^2 with ||r|| = 1
        state.norm_sq = std::max(0.0, state.norm_sq - 2.0 * delta * s + delta * delta);
    }
    if (rec) {
        rec->j = j;
        rec->alpha_old = old;
        rec->alpha_new = now;
        // S_r y - y = -2 <r, y> r, and y_new - y_old = -delta r
        rec->c = s != 0.0 ? delta / (2.0 * s) : 0.0;
        rec->norm_y = std::sqrt(state.norm_sq);
        rec->sweep = state.sweep;
    }
    return std::abs(delta);
}

/// max_j |alpha_j - clip(alpha_j + <r_j, y>, I_j)|
inline double kkt_residual(const DualState& state, const SolarBase& base)
{
    double worst = 0.0;
    for (Index j = 0; j < base.size(); ++j) {
        const double s = base.dot(j, state.y);
        worst = std::max(worst, std::abs(state.alpha[j] - base.interval(j).clip(state.alpha[j] + s)));
    }
    return worst;
}

struct NoTrace
{
    void operator()(const TraceRecord&, const DualState&) const noexcept {}
};

/**
 * Minimum-norm element of x - Z(B, Lambda) by cyclic coordinate descent.
 *
 * The observer is called after every coordinate update with the trace record
 * and the post-update state. Point intervals are skipped. Stops when both the
 * relative decrease of ||y||^2 over a sweep is <= tol and no coordinate moved
 * more than kkt_tol during it.
 */
template <class Observer>
MinNormResult solve_min_norm(DualState state, const SolarBase& base, const SolveOptions& opts, Observer&& observe)
{
    if (!(opts.tol > 0.0)) throw Error("SolveOptions: tol must be positive");
    std::vector<Index> order;
    for (Index j = 0; j < base.size(); ++j) {
        if (!base.interval(j).is_point()) order.push_back(j);
    }
    if (opts.sweep_order == SweepOrder::cyclic_shuffled_once) {
        std::mt19937_64 rng(opts.shuffle_seed);
        std::shuffle(order.begin(), order.end(), rng);
    }

    constexpr bool tracing = !std::is_same_v<std::decay_t<Observer>, NoTrace>;

    // raw column storage and bounds for the hot loop; same update as coordinate_update
    const auto& mat = base.bases();
    const auto* outer = mat.outerIndexPtr();
    const auto* inner = mat.innerIndexPtr();
    const double* val = mat.valuePtr();
    std::vector<double> lo(static_cast<std::size_t>(base.size())), hi(lo.size());
    for (Index j = 0; j < base.size(); ++j) {
        lo[static_cast<std::size_t>(j)] = base.interval(j).lo;
        hi[static_cast<std::size_t>(j)] = base.interval(j).hi;
    }

    MinNormResult res;
    TraceRecord rec;
    const std::size_t refresh = std::max<std::size_t>(opts.refresh_every, 1);
    while (state.sweep < opts.max_sweeps) {
        const double before = state.norm_sq;
        double moved = 0.0;
        double* y = state.y.data();
        for (Index j : order) {
            const auto begin = outer[j], end = outer[j + 1];
            double s = 0.0;
            for (auto k = begin; k < end; ++k) s += val[k] * y[inner[k]];
            const double old = state.alpha[j];
            const auto jj = static_cast<std::size_t>(j);
            const double now = std::min(std::max(old + s, lo[jj]), hi[jj]);
            const double delta = now - old;
            if (delta != 0.0) {
                state.alpha[j] = now;
                for (auto k = begin; k < end; ++k) y[inner[k]] -= delta * val[k];
                state.norm_sq = std::max(0.0, state.norm_sq - 2.0 * delta * s + delta * delta);
                moved = std::max(moved, std::abs(delta));
            }
            if constexpr (tracing) {
                rec = {state.sweep, j, old, now, s != 0.0 ? delta / (2.0 * s) : 0.0, std::sqrt(state.norm_sq)};
                observe(static_cast<const TraceRecord&>(rec), static_cast<const DualState&>(state));
            }
        }
        ++state.sweep;
        if (state.sweep % refresh == 0) state.refresh(base);
        const double decrease = before - state.norm_sq;
        if (decrease <= opts.tol * std::max(before, 1e-300) && moved <= opts.kkt_tol) {
            res.converged = true;
            break;
        }
    }
    state.refresh(base);
    res.sweeps = state.sweep;
    res.kkt_residual = kkt_residual(state, base);
    res.fit = state.y;
    res.state = std::move(state);
    return res;
}

inline MinNormResult solve_min_norm(const Eigen::Ref<const Vector>& x, const SolarBase& base,
                                    const SolveOptions& opts = {})
{
    if (x.size() != base.dim()) throw DimensionMismatch("solve_min_norm", base.dim(), x.size());
    if (!opts.trace_enabled) return solve_min_norm(DualState::initial(base, x), base, opts, NoTrace{});
    std::vector<TraceRecord> trace;
    auto res = solve_min_norm(DualState::initial(base, x), base, opts,
                              [&](const TraceRecord& r, const DualState&) { trace.push_back(r); });
    res.trace = std::move(trace);
    return res;
}

/// Projection of x onto Z(B, Lambda); equals x - U(x).
inline Vector project_onto_support_set(const Eigen::Ref<const Vector>& x, const SolarBase& base,
                                       const SolveOptions& opts = {})
{
    const auto res = solve_min_norm(x, base, opts);
    return base.combine(res.state.alpha);
}

/// prox of s * h_C at v: v - Proj_{sZ}(v), the min-norm element of v - sZ.
inline MinNormResult prox_support(const Eigen::Ref<const Vector>& v, const SolarBase& base, double s,
                                  const SolveOptions& opts = {})
{
    return solve_min_norm(v, base.scaled(s), opts);
}

inline void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace)
{
    const auto prec = os.precision(17);
    os << "sweep,j,alpha_old,alpha_new,c,norm_y\n";
    for (const auto& r : trace) {
        os << r.sweep << ',' << r.j << ',' << r.alpha_old << ',' << r.alpha_new << ',' << r.c << ',' << r.norm_y << '\n';
    }
    os.precision(prec);
}

} // namespace solar
