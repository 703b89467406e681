#pragma once
#include <cmath>
#include <solar/dual_solver.hpp>
#include <solar/expofam.hpp>

namespace solar {

/// phi(theta) - <x, theta> + h_C(theta); unbounded penalty sides tolerate a
/// tiny slope (solver round-off) instead of returning +inf.
inline double composite_objective(const GeneratorFamily& family, const SolarBase& base,
                                  const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& theta)
{
    const double slack = 1e-9 * (1.0 + theta.cwiseAbs().maxCoeff());
    return family.value(theta) - x.dot(theta) + support_function(base, theta, slack);
}

struct OracleOptions
{
    double tol = 1e-14;           // relative objective decrease
    std::size_t max_iter = 20000;
    double armijo = 1e-4;
    double min_step = 1e-12;
    SolveOptions prox{1e-16, 1e-15, 1000000};
};

struct OracleResult
{
    Vector theta;
    double objective = 0.0;
    double residual = 0.0;  // ||theta+ - theta|| / step at the last iterate
    std::size_t iterations = 0;
    bool converged = false;
    bool line_search_failed = false;
};

/// alpha clipped into the intervals of `base` (guards round-off after rescaling).
inline Vector clip_to(const SolarBase& base, Vector alpha)
{
    for (Index j = 0; j < base.size(); ++j) alpha[j] = base.interval(j).clip(alpha[j]);
    return alpha;
}

/**
 * Direct solve of min phi(theta) - <x, theta> + h_C(theta) by proximal gradient
 * with backtracking (start from step 1 each iteration, halve until the Armijo
 * condition F(theta+) <= F(theta) - c ||theta+ - theta||^2 / s holds). The
 * prox of s h_C is the min-norm element of v - sZ, computed by the dual solver
 * warm-started from the previous dual point (rescaled to the new step).
 *
 * Used only to certify the least-squares reduction.
 */
inline OracleResult oracle_solve(const GeneratorFamily& family, const SolarBase& base,
                                 const Eigen::Ref<const Vector>& x, const OracleOptions& opts = {})
{
    if (x.size() != base.dim()) throw DimensionMismatch("oracle_solve", base.dim(), x.size());
    OracleResult res;
    Vector theta = Vector::Zero(x.size());
    double f = composite_objective(family, base, x, theta);
    // dual point of the last prox, divided by its step so that it lies in Lambda
    Vector beta(base.size());
    for (Index j = 0; j < base.size(); ++j) beta[j] = base.interval(j).nearest_to_zero();

    for (std::size_t it = 0; it < opts.max_iter; ++it) {
        res.iterations = it + 1;
        const Vector g = family.grad(theta) - x;
        double s = 1.0;
        Vector next, next_beta;
        double f_next = 0.0;
        double step_norm = 0.0;
        bool accepted = false;
        while (s >= opts.min_step) {
            const SolarBase scaled = base.scaled(s);
            auto pr = solve_min_norm(DualState::from_alpha(scaled, theta - s * g, clip_to(scaled, s * beta)), scaled,
                                     opts.prox, NoTrace{});
            next = std::move(pr.fit);
            next_beta = pr.state.alpha / s;
            step_norm = (next - theta).norm();
            f_next = composite_objective(family, base, x, next);
            if (step_norm <= 1e-15 * (1.0 + theta.norm())) {
                accepted = true;
                break;
            }
            if (std::isfinite(f_next) && f_next <= f - opts.armijo * step_norm * step_norm / s) {
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if (!accepted) {
            res.line_search_failed = true;
            break;
        }
        const double decrease = f - f_next;
        theta = std::move(next);
        beta = std::move(next_beta);
        f = f_next;
        res.residual = step_norm / s;
        if (decrease <= opts.tol * std::max(1.0, std::abs(f)) && res.residual <= std::sqrt(opts.tol)) {
            res.converged = true;
            break;
        }
    }
    res.theta = std::move(theta);
    res.objective = f;
    return res;
}

} // namespace solar
