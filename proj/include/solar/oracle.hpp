#pragma once
#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>
#include <solar/dual_solver.hpp>
#include <solar/expofam.hpp>
#include <solar/fast_solvers.hpp>
#include <solar/majorization.hpp>
#include <solar/oracle_solve.hpp>
#include <solar/penalty.hpp>
#include <solar/reflection_group.hpp>

namespace solar {

/// Bounded interval used to sample t in I; unbounded sides are cut at `reach`.
inline ExtInterval truncate(const ExtInterval& iv, double reach)
{
    double lo = iv.lo, hi = iv.hi;
    if (lo == -inf && hi == inf) return {-reach, reach};
    if (lo == -inf) lo = hi - reach;
    if (hi == inf) hi = lo + reach;
    return {lo, hi};
}

/// Random dual-feasible point z = x - sum_j t_j r_j with t_j uniform on truncated I_j.
inline Vector sample_feasible(const SolarBase& base, const Eigen::Ref<const Vector>& x, std::mt19937_64& rng)
{
    const double reach = 10.0 * (1.0 + x.norm());
    Vector t(base.size());
    for (Index j = 0; j < base.size(); ++j) {
        const auto iv = truncate(base.interval(j), reach);
        std::uniform_real_distribution<double> u(iv.lo, iv.hi);
        t[j] = iv.is_point() ? iv.lo : u(rng);
    }
    return x - base.combine(t);
}

/// Check u <=_G z for `trials` sampled feasible z (u is normally U(x)).
inline bool gminimal_sample_check(const SolarBase& base, const GroupReport& rep, const Eigen::Ref<const Vector>& x,
                                  const Eigen::Ref<const Vector>& u, std::size_t trials, unsigned long long seed = 1)
{
    if (!rep.is_finite()) throw GroupError("gminimal_sample_check: group is not known to be finite");
    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k < trials; ++k) {
        const Vector z = sample_feasible(base, x, rng);
        if (!majorizes(rep, u, z).holds) return false;
    }
    return true;
}

inline bool gminimal_sample_check(const SolarBase& base, const GroupReport& rep, const Eigen::Ref<const Vector>& x,
                                  std::size_t trials, unsigned long long seed = 1)
{
    const auto res = solve_min_norm(x, base, SolveOptions{1e-14, 1e-12, 1000000});
    return gminimal_sample_check(base, rep, x, res.fit, trials, seed);
}

struct CheckResult
{
    std::string name;
    bool passed = false;
    std::string detail;
};

struct SuiteReport
{
    unsigned long long seed = 0;
    std::vector<CheckResult> checks;

    bool passed() const
    {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
    }
};

struct SuiteOptions
{
    /// added to U(x) before the minimality checks; a harness sanity switch
    double inject_perturbation = 0.0;
};

namespace detail {

inline Vector randn(Index n, std::mt19937_64& rng, double sd = 1.0)
{
    std::normal_distribution<double> nd(0.0, sd);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = nd(rng);
    return v;
}

inline PenaltySpec make_spec(PenaltyKind k, Index n, std::vector<double> lambdas)
{
    return PenaltySpec{k, n, std::move(lambdas), std::nullopt, std::nullopt};
}

inline SolveOptions tight_solve() { return SolveOptions{1e-14, 1e-12, 1000000}; }

/// The permutation-invariant convex test functions.
inline std::vector<std::pair<std::string, std::function<double(const Vector&)>>> invariant_convex_functions()
{
    return {
        {"sum-of-squares", [](const Vector& v) { return v.squaredNorm(); }},
        {"log-sum-exp", [](const Vector& v) {
             const double m = v.maxCoeff();
             return m + std::log((v.array() - m).exp().sum());
         }},
        {"top-2-sum", [](const Vector& v) {
             std::vector<double> s(v.data(), v.data() + v.size());
             std::sort(s.begin(), s.end(), std::greater<>());
             return s[0] + (s.size() > 1 ? s[1] : 0.0);
         }},
        {"string-length", [](const Vector& v) { return (1.0 + v.array().square()).sqrt().sum(); }},
        {"max-abs", [](const Vector& v) { return v.cwiseAbs().maxCoeff(); }},
    };
}

} // namespace detail

/**
 * Property checks for the support function, reflection groups, majorization,
 * the dual solver and the reduction, run on random instances drawn from `seed`.
 */
inline SuiteReport lemma_suite(unsigned long long seed, const SuiteOptions& opts = {})
{
    using detail::make_spec;
    using detail::randn;
    SuiteReport report;
    report.seed = seed;
    std::mt19937_64 rng(seed);
    auto add = [&](std::string name, bool ok, std::string detail) {
        report.checks.push_back({std::move(name), ok, std::move(detail)});
    };

    const Index n = 5;
    const std::vector<std::pair<std::string, PenaltySpec>> penalties = {
        {"lasso", make_spec(PenaltyKind::lasso, n, {0.7})},
        {"fused-chain", make_spec(PenaltyKind::fused_graph, n, {0.5})},
        {"isotonic-chain", make_spec(PenaltyKind::isotonic_graph, n, {})},
        {"sparse-fused", make_spec(PenaltyKind::sparse_fused, n, {0.3, 0.4})},
        {"trend-filter", make_spec(PenaltyKind::trend_filter, n, {0.5})},
        {"nonneg", make_spec(PenaltyKind::nonneg, n, {})},
    };

    // support function: positive homogeneity, midpoint convexity, support inequality
    {
        bool ok = true;
        std::string where;
        for (const auto& [name, spec] : penalties) {
            const auto base = build_penalty(spec);
            for (int k = 0; k < 50 && ok; ++k) {
                const Vector a = randn(n, rng), b = randn(n, rng);
                const double t = std::uniform_real_distribution<double>(0.0, 3.0)(rng);
                const double ha = support_function(base, a), hb = support_function(base, b);
                const double hta = support_function(base, t * a);
                const double hm = support_function(base, 0.5 * a + 0.5 * b);
                if (std::isfinite(ha) && std::abs(hta - t * ha) > 1e-10 * (1.0 + std::abs(t * ha))) ok = false;
                if (std::isfinite(ha) && std::isfinite(hb) && hm > 0.5 * ha + 0.5 * hb + 1e-10) ok = false;
                Vector tt(base.size());
                for (Index j = 0; j < base.size(); ++j) {
                    const auto iv = truncate(base.interval(j), 5.0);
                    tt[j] = std::uniform_real_distribution<double>(iv.lo, iv.hi)(rng);
                }
                const double pairing = base.combine(tt).dot(a);
                if (pairing > ha + 1e-10 * (1.0 + std::abs(pairing))) ok = false;
                if (!ok) where = name;
            }
        }
        add("support-function-homogeneity-convexity", ok, ok ? "6 penalties x 50 samples" : "failed on " + where);
    }

    // h of a sum of penalties is the sum of the h's
    {
        const auto a = build_penalty(penalties[0].second);
        const auto b = build_penalty(penalties[1].second);
        const auto ab = sum_penalties(a, b);
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            const Vector th = randn(n, rng);
            worst = std::max(worst, std::abs(support_function(ab, th) - support_function(a, th) - support_function(b, th)));
        }
        add("sum-penalties-additivity", worst <= 1e-10, "max deviation " + std::to_string(worst));
    }

    // reflections are orthogonal involutions; groups are closed and orthogonal
    {
        bool ok = true;
        for (int k = 0; k < 50; ++k) {
            const Reflection r(randn(n, rng));
            const Vector x = randn(n, rng);
            ok = ok && (reflect(r, reflect(r, x)) - x).norm() <= 1e-12 * (1.0 + x.norm());
            ok = ok && std::abs(reflect(r, x).norm() - x.norm()) <= 1e-12 * (1.0 + x.norm());
        }
        add("reflection-involution", ok, "50 random reflections");
    }
    {
        bool ok = true;
        std::string detail;
        for (const auto& spec : {make_spec(PenaltyKind::sparse_fused, 3, {1.0, 1.0}),
                                 make_spec(PenaltyKind::fused_graph, 4, {1.0})}) {
            const auto rep = generate_group(build_penalty(spec));
            std::uniform_int_distribution<std::size_t> pick(0, rep.elements.size() - 1);
            std::unordered_map<std::vector<std::int64_t>, int, detail::MatrixKeyHash> keys;
            for (const auto& g : rep.elements) keys.emplace(detail::matrix_key(g), 0);
            for (int k = 0; k < 500; ++k) {
                const Matrix prod = rep.elements[pick(rng)] * rep.elements[pick(rng)];
                ok = ok && keys.contains(detail::matrix_key(prod));
            }
            for (const auto& g : rep.elements) {
                const Index d = g.rows();
                ok = ok && (g.transpose() * g - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-8;
            }
            detail += std::to_string(rep.order) + " ";
        }
        add("group-closure-orthogonality", ok, "orders " + detail);
    }

    const std::vector<std::pair<std::string, PenaltySpec>> finite_cases = {
        {"lasso", make_spec(PenaltyKind::lasso, 4, {0.7})},
        {"fused-chain", make_spec(PenaltyKind::fused_graph, 4, {0.5})},
        {"sparse-fused", make_spec(PenaltyKind::sparse_fused, 3, {0.3, 0.4})},
    };

    // fast majorization paths agree with the generic certificate; Lemma (a) <=> (c)
    {
        int disagreements = 0, support_violations = 0, missing_directions = 0;
        for (const auto& [name, spec] : finite_cases) {
            const auto rep = generate_group(build_penalty(spec));
            const Index d = spec.n;
            for (int k = 0; k < 20; ++k) {
                const Vector y = randn(d, rng);
                // a point of the orbitope pushed outward by a random amount
                const auto pts = orbit(rep, y);
                Vector w = randn(static_cast<Index>(pts.size()), rng).cwiseAbs();
                w /= w.sum();
                Vector x = Vector::Zero(d);
                for (std::size_t i = 0; i < pts.size(); ++i) x += w[static_cast<Index>(i)] * pts[i];
                Vector dir = randn(d, rng);
                if (rep.classification == GroupClass::permutation) dir.array() -= dir.mean();
                x += std::uniform_real_distribution<double>(0.0, 1.0)(rng) * dir;
                const auto fast = majorizes(rep, x, y);
                MajorizeOptions g;
                g.force_generic = true;
                const auto gen = majorizes(rep, x, y, g);
                if (fast.holds != gen.holds) {
                    // ties within 1e-6 of the orbitope boundary are undecidable numerically
                    if (gen.residual > 1e-4 || fast.holds) ++disagreements;
                }
                double worst = -inf;
                for (int u = 0; u < 1000; ++u) {
                    const Vector dirn = randn(d, rng);
                    worst = std::max(worst, orbit_support(rep, x, dirn) - orbit_support(rep, y, dirn));
                }
                if (fast.holds && worst > 1e-7 * (1.0 + y.norm())) ++support_violations;
                if (!fast.holds) {
                    const Vector& u = *fast.direction;
                    if (!(orbit_support(rep, x, u) > orbit_support(rep, y, u))) ++missing_directions;
                }
            }
        }
        add("majorization-fast-vs-generic", disagreements == 0, std::to_string(disagreements) + " disagreements");
        add("majorization-support-function-equivalence", support_violations == 0 && missing_directions == 0,
            std::to_string(support_violations) + " support violations, " + std::to_string(missing_directions)
                + " invalid separating directions");
    }

    // H subset of G: H-majorization implies G-majorization
    {
        const auto h = generate_group(build_penalty(make_spec(PenaltyKind::fused_graph, 3, {1.0})));
        const auto g = generate_group(build_penalty(make_spec(PenaltyKind::sparse_fused, 3, {1.0, 1.0})));
        int bad = 0, tested = 0;
        for (int k = 0; k < 100; ++k) {
            const Vector y = randn(3, rng);
            Vector x = randn(3, rng) * 0.5;
            x.array() += y.mean() - x.mean();
            if (majorizes(h, x, y).holds) {
                ++tested;
                if (!majorizes(g, x, y).holds) ++bad;
            }
        }
        add("subgroup-inclusion", bad == 0, std::to_string(tested) + " H-majorized pairs, " + std::to_string(bad) + " failures");
    }

    // coordinate descent: monotone norms, reflect-and-average coefficients
    {
        bool ok = true;
        double worst_c = 0.0;
        for (const auto& [name, spec] : penalties) {
            const auto base = build_penalty(spec);
            const Vector x = randn(n, rng, 2.0);
            double prev = x.norm();
            auto obs = [&](const TraceRecord& r, const DualState&) {
                if (r.norm_y > prev + 1e-12) ok = false;
                prev = r.norm_y;
                if (r.c < -1e-9 || r.c > 1.0 + 1e-9) {
                    ok = false;
                    worst_c = r.c;
                }
            };
            solve_min_norm(DualState::initial(base, x), base, detail::tight_solve(), obs);
        }
        add("cd-monotone-reflect-average", ok, ok ? "all traced updates in [0, 1]" : "c = " + std::to_string(worst_c));
    }

    // minimum-norm element is G-minimal
    {
        bool ok = true;
        std::string failed;
        for (const auto& [name, spec] : {std::pair{std::string("lasso"), make_spec(PenaltyKind::lasso, 4, {0.7})},
                                         std::pair{std::string("fused-chain"), make_spec(PenaltyKind::fused_graph, 4, {0.5})},
                                         std::pair{std::string("isotonic-chain"), make_spec(PenaltyKind::isotonic_graph, 4, {})},
                                         std::pair{std::string("sparse-fused"), make_spec(PenaltyKind::sparse_fused, 3, {0.3, 0.4})}}) {
            const auto base = build_penalty(spec);
            const auto rep = generate_group(base);
            const Vector x = randn(spec.n, rng, 2.0);
            Vector u = solve_min_norm(x, base, detail::tight_solve()).fit;
            u[0] += opts.inject_perturbation;
            if (!gminimal_sample_check(base, rep, x, u, 50, rng())) {
                ok = false;
                failed += name + " ";
            }
        }
        add("g-minimality-sampling", ok, ok ? "50 trials x 4 penalties" : "failed: " + failed);
    }

    // uniqueness of the minimum-norm element from a different start
    {
        double worst = 0.0;
        for (const auto& [name, spec] : penalties) {
            const auto base = build_penalty(spec);
            const Vector x = randn(n, rng, 2.0);
            Vector alpha(base.size());
            for (Index j = 0; j < base.size(); ++j) {
                const auto iv = truncate(base.interval(j), 3.0);
                alpha[j] = std::uniform_real_distribution<double>(iv.lo, iv.hi)(rng);
            }
            const auto a = solve_min_norm(x, base, detail::tight_solve());
            const auto b = solve_min_norm(DualState::from_alpha(base, x, alpha), base, detail::tight_solve(), NoTrace{});
            worst = std::max(worst, (a.fit - b.fit).lpNorm<Eigen::Infinity>());
        }
        add("min-norm-uniqueness", worst <= 1e-7, "max deviation " + std::to_string(worst));
    }

    // U(x) minimizes every permutation-invariant convex function over x - Z
    {
        int violations = 0;
        const auto fns = detail::invariant_convex_functions();
        for (const auto& spec : {make_spec(PenaltyKind::fused_graph, n, {0.5}), make_spec(PenaltyKind::isotonic_graph, n, {})}) {
            const auto base = build_penalty(spec);
            const Vector x = randn(n, rng, 2.0);
            Vector u = solve_min_norm(x, base, detail::tight_solve()).fit;
            u[0] += opts.inject_perturbation;
            for (int k = 0; k < 50; ++k) {
                const Vector z = sample_feasible(base, x, rng);
                for (const auto& [fname, f] : fns) {
                    if (f(u) > f(z) + 1e-9 * (1.0 + std::abs(f(z)))) ++violations;
                }
            }
        }
        add("invariant-convex-minimality", violations == 0, std::to_string(violations) + " violations");
    }

    // specialized solvers agree with coordinate descent
    {
        double worst = 0.0;
        const Index m = 30;
        const Vector x = randn(m, rng);
        const auto fused = build_penalty(make_spec(PenaltyKind::fused_graph, m, {0.8}));
        const auto iso = build_penalty(make_spec(PenaltyKind::isotonic_graph, m, {}));
        const auto l1 = build_penalty(make_spec(PenaltyKind::lasso, m, {0.8}));
        worst = std::max(worst, (taut_string(x, 0.8) - solve_min_norm(x, fused, detail::tight_solve()).fit).lpNorm<Eigen::Infinity>());
        worst = std::max(worst, (pava(x) - solve_min_norm(x, iso, detail::tight_solve()).fit).lpNorm<Eigen::Infinity>());
        worst = std::max(worst, (soft_threshold(x, 0.8) - solve_min_norm(x, l1, detail::tight_solve()).fit).lpNorm<Eigen::Infinity>());
        add("fast-solver-equivalence", worst <= 1e-6, "max deviation " + std::to_string(worst));
    }

    // Moreau consistency: U(x) + Proj_Z(x) = x
    {
        double worst = 0.0;
        for (const auto& [name, spec] : penalties) {
            const auto base = build_penalty(spec);
            const Vector x = randn(n, rng, 2.0);
            const Vector u = solve_min_norm(x, base, detail::tight_solve()).fit;
            const Vector p = project_onto_support_set(x, base, detail::tight_solve());
            worst = std::max(worst, (u - (x - p)).norm());
        }
        add("moreau-consistency", worst <= 1e-8, "max deviation " + std::to_string(worst));
    }

    // the reduction: grad phi*(U(x)) solves the bernoulli problem directly
    {
        const auto spec = make_spec(PenaltyKind::fused_graph, n, {0.05});
        const auto base = build_penalty(spec);
        const auto fam = GeneratorFamily(FamilyKind::bernoulli);
        Vector x(n);
        for (Index i = 0; i < n; ++i) x[i] = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
        const Vector t = reduce(fam, taut_string(x, 0.05));
        const auto direct = oracle_solve(fam, base, x);
        const double diff = (t - direct.theta).lpNorm<Eigen::Infinity>();
        add("reduction-theorem", direct.converged && diff <= 1e-4, "max deviation " + std::to_string(diff));
    }

    return report;
}

} // namespace solar
