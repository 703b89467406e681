#pragma once
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>
#include <solar/error.hpp>
#include <solar/solar_base.hpp>

namespace solar {

/// Points whose convex hull is tested, and the target point.
struct SimplexLSProblem
{
    std::vector<Vector> vertices;
    Vector target;
};

struct SimplexLSOptions
{
    double tol = 1e-8;              // stop once the residual norm drops below this
    std::size_t max_iter = 20000;
    /// stop early once the residual is certified to exceed this (0 disables)
    double stop_above = 0.0;
};

struct SimplexLSResult
{
    Vector weights;
    double residual = 0.0;
    /// certified lower bound on the optimal residual (from the Frank-Wolfe gap)
    double residual_lower_bound = 0.0;
    Vector gradient_direction;  // target - V w
    std::size_t iterations = 0;
    bool converged = false;
};

/// Euclidean projection onto the probability simplex (sort based).
inline Vector project_simplex(const Eigen::Ref<const Vector>& v)
{
    const Index m = v.size();
    std::vector<double> u(v.data(), v.data() + m);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0, tau = 0.0;
    for (Index k = 0; k < m; ++k) {
        cum += u[static_cast<std::size_t>(k)];
        const double t = (cum - 1.0) / static_cast<double>(k + 1);
        if (u[static_cast<std::size_t>(k)] - t > 0.0) tau = t;
    }
    return (v.array() - tau).max(0.0).matrix();
}

/**
 * min || target - sum_v w_v v || over the probability simplex.
 *
 * Accelerated projected gradient with function-value restarts, starting from
 * uniform weights. Deterministic for a fixed iteration budget.
 */
inline SimplexLSResult simplex_least_squares(const SimplexLSProblem& p, const SimplexLSOptions& opts = {})
{
    if (p.vertices.empty()) throw Error("simplex_least_squares: empty vertex list");
    if (p.vertices.size() > 10000) throw Error("simplex_least_squares: more than 10000 vertices");
    const Index n = p.target.size();
    const Index m = static_cast<Index>(p.vertices.size());
    Matrix V(n, m);
    for (Index j = 0; j < m; ++j) {
        const auto& v = p.vertices[static_cast<std::size_t>(j)];
        if (v.size() != n) throw DimensionMismatch("simplex_least_squares", n, v.size());
        V.col(j) = v;
    }
    const Vector& x = p.target;

    Eigen::SelfAdjointEigenSolver<Matrix> es(V * V.transpose(), Eigen::EigenvaluesOnly);
    const double lip = std::max(es.eigenvalues().maxCoeff(), 1e-300);

    auto objective = [&](const Vector& w) { return 0.5 * (V * w - x).squaredNorm(); };

    SimplexLSResult res;
    Vector w = Vector::Constant(m, 1.0 / static_cast<double>(m));
    Vector z = w;
    double t = 1.0;
    double f = objective(w);

    for (std::size_t it = 0; it < opts.max_iter; ++it) {
        res.iterations = it + 1;
        // certificates at the current iterate
        const Vector r = V * w - x;
        const Vector grad = V.transpose() * r;
        const double resid = r.norm();
        const double fw_gap = grad.dot(w) - grad.minCoeff();
        const double lower = std::sqrt(std::max(0.0, 2.0 * (0.5 * resid * resid - fw_gap)));
        res.residual_lower_bound = std::max(res.residual_lower_bound, lower);
        if (resid <= opts.tol) {
            res.converged = true;
            break;
        }
        if (opts.stop_above > 0.0 && res.residual_lower_bound > opts.stop_above) {
            res.converged = true;
            break;
        }
        if (fw_gap <= 1e-18 * (1.0 + f)) {
            res.converged = true;
            break;
        }

        const Vector gz = V.transpose() * (V * z - x);
        Vector w_next = project_simplex(z - gz / lip);
        const double f_next = objective(w_next);
        if (f_next > f) {
            // restart momentum
            z = w;
            t = 1.0;
            continue;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        z = w_next + ((t - 1.0) / t_next) * (w_next - w);
        w = std::move(w_next);
        f = f_next;
        t = t_next;
    }
    res.weights = w;
    res.gradient_direction = x - V * w;
    res.residual = res.gradient_direction.norm();
    if (res.residual <= opts.tol) res.converged = true;
    return res;
}

} // namespace solar
