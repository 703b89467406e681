#pragma once
#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>
#include <solar/reflection_group.hpp>
#include <solar/simplex_ls.hpp>

namespace solar {

/**
 * Result of testing x in conv(G y).
 *
 * When the test holds and a certificate was requested, `weights` are simplex
 * weights over `orbit_points`. When it fails, `direction` is a u with
 * h_{G x}(u) > h_{G y}(u).
 */
struct MajorizationVerdict
{
    bool holds = false;
    bool fast_path = false;
    double residual = 0.0;
    std::vector<Vector> orbit_points;
    Vector weights;
    std::optional<Vector> direction;
};

struct MajorizeOptions
{
    bool force_generic = false;
    bool want_certificate = false;
    double tol = 1e-9;                 // relative slack for the fast paths
    double generic_tol = 1e-6;         // holds iff residual <= generic_tol * (1 + ||y||)
    std::size_t max_orbit = 10000;
};

namespace detail {

inline double factorial(std::size_t k)
{
    double f = 1.0;
    for (std::size_t i = 2; i <= k; ++i) f *= static_cast<double>(i);
    return f;
}

/// Indices sorted by decreasing key.
inline std::vector<Index> argsort_desc(const std::vector<double>& key)
{
    std::vector<Index> idx(key.size());
    std::iota(idx.begin(), idx.end(), Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
        return key[static_cast<std::size_t>(a)] > key[static_cast<std::size_t>(b)];
    });
    return idx;
}

/// Sorted-decreasing partial sums of xs dominated by those of ys. Returns the
/// first violating k (1-based count), or 0.
inline std::size_t first_partial_sum_violation(const std::vector<double>& xs, const std::vector<double>& ys, double tol)
{
    std::vector<double> a = xs, b = ys;
    std::sort(a.begin(), a.end(), std::greater<>());
    std::sort(b.begin(), b.end(), std::greater<>());
    double sa = 0.0, sb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        sa += a[k];
        sb += b[k];
        if (sa > sb + tol) return k + 1;
    }
    return 0;
}

/**
 * Closed form for a full product group (see GroupReport::full_product): on an
 * unflipped component x <= y classically (equal sums, dominated sorted partial
 * sums); on a flipped one |x| is weakly submajorized by |y|.
 */
inline std::optional<MajorizationVerdict> fast_majorizes(const GroupReport& rep, const Vector& x, const Vector& y,
                                                          double tol)
{
    if (!rep.full_product) return std::nullopt;
    const Index n = rep.dim;
    std::vector<bool> flips(static_cast<std::size_t>(n), false);
    for (Index i : rep.flipped) flips[static_cast<std::size_t>(i)] = true;

    MajorizationVerdict v;
    v.fast_path = true;
    v.holds = true;
    for (const auto& comp : rep.components) {
        const bool signed_comp = flips[static_cast<std::size_t>(comp.front())];
        std::vector<double> xs, ys;
        double sx = 0.0, sy = 0.0;
        for (Index i : comp) {
            xs.push_back(signed_comp ? std::abs(x[i]) : x[i]);
            ys.push_back(signed_comp ? std::abs(y[i]) : y[i]);
            sx += x[i];
            sy += y[i];
        }
        if (!signed_comp && std::abs(sx - sy) > tol) {
            v.holds = false;
            Vector u = Vector::Zero(n);
            for (Index i : comp) u[i] = sx > sy ? 1.0 : -1.0;
            v.direction = u;
            return v;
        }
        if (auto k = first_partial_sum_violation(xs, ys, tol)) {
            v.holds = false;
            Vector u = Vector::Zero(n);
            const auto order = argsort_desc(xs);
            for (std::size_t t = 0; t < k; ++t) {
                const Index i = comp[static_cast<std::size_t>(order[t])];
                u[i] = signed_comp && x[i] < 0 ? -1.0 : 1.0;
            }
            v.direction = u;
            return v;
        }
    }
    return v;
}

} // namespace detail

/// Decide x <=_G y, i.e. x in conv(G y), for a finite group.
inline MajorizationVerdict majorizes(const GroupReport& rep, const Eigen::Ref<const Vector>& x_in,
                                     const Eigen::Ref<const Vector>& y_in, const MajorizeOptions& opts = {})
{
    if (!rep.is_finite()) throw GroupError("majorizes: group is not known to be finite");
    if (x_in.size() != rep.dim) throw DimensionMismatch("majorizes", rep.dim, x_in.size());
    if (y_in.size() != rep.dim) throw DimensionMismatch("majorizes", rep.dim, y_in.size());
    const Vector x = x_in, y = y_in;

    if (!opts.force_generic) {
        const double tol = opts.tol * (1.0 + y.lpNorm<1>());
        if (auto v = detail::fast_majorizes(rep, x, y, tol)) {
            if (!(v->holds && opts.want_certificate)) return *v;
        }
    }

    MajorizationVerdict v;
    v.orbit_points = orbit(rep, y);
    if (v.orbit_points.size() > opts.max_orbit) throw GroupError("majorizes: orbit too large for the generic path");
    const double threshold = opts.generic_tol * (1.0 + y.norm());
    SimplexLSOptions so;
    so.tol = std::min(1e-8 * (1.0 + y.norm()), threshold);
    so.stop_above = threshold;
    so.max_iter = 50000;
    const auto res = simplex_least_squares({v.orbit_points, x}, so);
    v.residual = res.residual;
    v.holds = res.residual <= threshold;
    v.weights = res.weights;
    if (!v.holds) v.direction = res.gradient_direction;
    return v;
}

/// h_{G y}(u) = max over the orbit of <g y, u>.
inline double orbit_support(const GroupReport& rep, const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& u)
{
    double best = -inf;
    for (const auto& g : rep.elements) best = std::max(best, (g * y).dot(u));
    return best;
}

} // namespace solar
