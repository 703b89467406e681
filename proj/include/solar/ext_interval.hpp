#pragma once
#include <algorithm>
#include <cmath>
#include <limits>
#include <solar/error.hpp>

namespace solar {

inline constexpr double inf = std::numeric_limits<double>::infinity();

/// Closed interval of the extended real line. Either end may be infinite.
struct ExtInterval
{
    double lo = 0.0;
    double hi = 0.0;

    constexpr ExtInterval() = default;

    ExtInterval(double lo_, double hi_) : lo(lo_), hi(hi_)
    {
        if (std::isnan(lo) || std::isnan(hi) || lo > hi || lo == inf || hi == -inf) {
            throw InvalidPenalty("ExtInterval: empty or malformed interval");
        }
    }

    static ExtInterval symmetric(double radius) { return {-radius, radius}; }
    static ExtInterval nonpositive() { return {-inf, 0.0}; }

    bool contains(double t) const noexcept { return lo <= t && t <= hi; }
    bool is_point() const noexcept { return lo == hi; }
    bool is_bounded() const noexcept { return std::isfinite(lo) && std::isfinite(hi); }

    double clip(double t) const noexcept { return std::clamp(t, lo, hi); }

    /// Feasible starting value: 0 when 0 is inside, else the endpoint nearest 0.
    double nearest_to_zero() const noexcept { return clip(0.0); }

    /// sup over t in the interval of t * s. A zero slope contributes 0 even on
    /// unbounded intervals.
    double sup_linear(double s) const noexcept
    {
        if (s > 0.0) return hi == inf ? inf : hi * s;
        if (s < 0.0) return lo == -inf ? inf : lo * s;
        return 0.0;
    }

    ExtInterval scaled(double factor) const
    {
        // factor >= 0; inf * positive stays inf, and 0 * inf must collapse to 0.
        if (factor == 0.0) return {0.0, 0.0};
        return {lo * factor, hi * factor};
    }

    friend bool operator==(const ExtInterval&, const ExtInterval&) = default;
};

} // namespace solar
