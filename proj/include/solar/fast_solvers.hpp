#pragma once
#include <cmath>
#include <deque>
#include <vector>
#include <solar/error.hpp>
#include <solar/solar_base.hpp>

namespace solar {

/// Tube of radius `radius` around the cumulative-sum path w, endpoints pinned.
struct TautTube
{
    Vector w;  // w_0 = 0, w_i = x_0 + ... + x_{i-1}
    double radius = 0.0;

    static TautTube around(const Eigen::Ref<const Vector>& x, double radius)
    {
        if (!(radius >= 0.0)) throw Error("TautTube: radius must be >= 0");
        TautTube t;
        t.radius = radius;
        t.w.resize(x.size() + 1);
        t.w[0] = 0.0;
        for (Index i = 0; i < x.size(); ++i) t.w[i + 1] = t.w[i] + x[i];
        return t;
    }

    Index knots() const noexcept { return w.size(); }
    double lower(Index i) const noexcept { return (i == 0 || i + 1 == w.size()) ? w[i] : w[i] - radius; }
    double upper(Index i) const noexcept { return (i == 0 || i + 1 == w.size()) ? w[i] : w[i] + radius; }
};

/**
 * 1d fused lasso fit argmin 1/2 ||x - theta||^2 + lambda sum |theta_{j+1} - theta_j|.
 *
 * The fit is the slope sequence of the taut string through the tube
 * [w - lambda, w + lambda] around the cumulative sums of x. The string is built
 * by a single funnel sweep: the upper chain is the convex minorant of the
 * ceiling points seen since the current apex, the lower chain the concave
 * majorant of the floor points. When a new ceiling point drops below the lower
 * chain (or a floor point rises above the upper chain) the apex advances along
 * the other chain and the passed segment is emitted. Linear time.
 */
inline Vector taut_string(const Eigen::Ref<const Vector>& x, double lambda)
{
    const Index n = x.size();
    if (n < 1) throw Error("taut_string: empty signal");
    if (!(lambda >= 0.0)) throw Error("taut_string: lambda must be >= 0");
    if (lambda == 0.0 || n == 1) return x;
    const TautTube tube = TautTube::around(x, lambda);

    struct Pt
    {
        double t, v;
    };
    auto slope = [](const Pt& a, const Pt& b) { return (b.v - a.v) / (b.t - a.t); };

    Vector fit(n);
    auto emit = [&](const Pt& a, const Pt& b) {
        const double s = slope(a, b);
        for (auto i = static_cast<Index>(a.t); i < static_cast<Index>(b.t); ++i) fit[i] = s;
    };

    // chains hold the apex at the front
    std::deque<Pt> upper{{0.0, tube.w[0]}};
    std::deque<Pt> lower{{0.0, tube.w[0]}};

    for (Index k = 1; k <= n; ++k) {
        const Pt c{static_cast<double>(k), tube.upper(k)};
        const Pt f{static_cast<double>(k), tube.lower(k)};

        // ceiling point: wrap around the lower chain while c lies below it
        while (lower.size() >= 2 && slope(lower[0], c) < slope(lower[0], lower[1])) {
            emit(lower[0], lower[1]);
            lower.pop_front();
            upper.assign(1, lower.front());
        }
        while (upper.size() >= 2 && slope(upper[upper.size() - 2], upper.back()) >= slope(upper[upper.size() - 2], c)) {
            upper.pop_back();
        }
        upper.push_back(c);

        // floor point: wrap around the upper chain while f lies above it
        while (upper.size() >= 2 && slope(upper[0], f) > slope(upper[0], upper[1])) {
            emit(upper[0], upper[1]);
            upper.pop_front();
            lower.assign(1, upper.front());
        }
        while (lower.size() >= 2 && slope(lower[lower.size() - 2], lower.back()) <= slope(lower[lower.size() - 2], f)) {
            lower.pop_back();
        }
        lower.push_back(f);
    }
    // both chains now end at the pinned endpoint; the upper one is the remaining path
    for (std::size_t i = 0; i + 1 < upper.size(); ++i) emit(upper[i], upper[i + 1]);
    return fit;
}

/// Least-squares projection onto theta_0 <= ... <= theta_{n-1} (unit weights).
inline Vector pava(const Eigen::Ref<const Vector>& x)
{
    const Index n = x.size();
    if (n < 1) throw Error("pava: empty signal");
    struct Block
    {
        double sum;
        Index count;
        double mean() const { return sum / static_cast<double>(count); }
    };
    std::vector<Block> blocks;
    blocks.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        blocks.push_back({x[i], 1});
        while (blocks.size() >= 2 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
            const Block b = blocks.back();
            blocks.pop_back();
            blocks.back().sum += b.sum;
            blocks.back().count += b.count;
        }
    }
    Vector fit(n);
    Index i = 0;
    for (const auto& b : blocks) {
        const double m = b.mean();
        for (Index k = 0; k < b.count; ++k) fit[i++] = m;
    }
    return fit;
}

inline Vector soft_threshold(const Eigen::Ref<const Vector>& x, double lambda)
{
    if (!(lambda >= 0.0)) throw Error("soft_threshold: lambda must be >= 0");
    Vector out(x.size());
    for (Index i = 0; i < x.size(); ++i) {
        const double a = std::abs(x[i]) - lambda;
        out[i] = a > 0.0 ? std::copysign(a, x[i]) : 0.0;
    }
    return out;
}

/// Whether the string z (length n + 1, pinned ends) stays in the tube around x.
inline bool tube_check(const Eigen::Ref<const Vector>& x, double lambda, const Eigen::Ref<const Vector>& z)
{
    const TautTube tube = TautTube::around(x, lambda);
    if (z.size() != tube.knots()) throw DimensionMismatch("tube_check", tube.knots(), z.size());
    const Index last = z.size() - 1;
    if (std::abs(z[0] - tube.w[0]) > 1e-9 || std::abs(z[last] - tube.w[last]) > 1e-9) {
        throw Error("tube_check: string endpoints are not pinned to the cumulative sums");
    }
    return (z - tube.w).lpNorm<Eigen::Infinity>() <= lambda + 1e-9;
}

/// Cumulative sums (z_0 = 0) of a fit; the inverse of taking first differences.
inline Vector integrate(const Eigen::Ref<const Vector>& theta)
{
    Vector z(theta.size() + 1);
    z[0] = 0.0;
    for (Index i = 0; i < theta.size(); ++i) z[i + 1] = z[i] + theta[i];
    return z;
}

} // namespace solar
