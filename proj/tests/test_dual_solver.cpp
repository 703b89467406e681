#include <gtest/gtest.h>
#include <cmath>
#include <random>
#include <sstream>
#include <solar/dual_solver.hpp>
#include <solar/fast_solvers.hpp>
#include <solar/penalty.hpp>

using namespace solar;

namespace {

SolarBase penalty(PenaltyKind k, Index n, std::vector<double> lambdas = {1.0})
{
    return build_penalty(PenaltySpec{k, n, std::move(lambdas), std::nullopt, std::nullopt});
}

Vector vec(std::initializer_list<double> v)
{
    Vector out(static_cast<Index>(v.size()));
    Index i = 0;
    for (double d : v) out[i++] = d;
    return out;
}

const SolveOptions tight{1e-14, 1e-12, 1000000};

} // namespace

TEST(CoordinateUpdate, ClipsToEndpoint)
{
    const SolarBase base(1, {{{0, 1.0}}}, {ExtInterval(-1, 1)});
    auto st = DualState::initial(base, vec({3}));
    EXPECT_DOUBLE_EQ(coordinate_update(st, 0, base), 1.0);
    EXPECT_DOUBLE_EQ(st.alpha[0], 1.0);
    EXPECT_DOUBLE_EQ(st.y[0], 2.0);
    EXPECT_DOUBLE_EQ(st.norm_sq, 4.0);
}

TEST(CoordinateUpdate, InteriorStepAveragesPair)
{
    const auto base = penalty(PenaltyKind::isotonic_graph, 2);
    auto st = DualState::initial(base, vec({2, 1}));
    TraceRecord rec;
    coordinate_update(st, 0, base, &rec);
    EXPECT_NEAR(st.alpha[0], -1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(st.y[0], 1.5, 1e-15);
    EXPECT_NEAR(st.y[1], 1.5, 1e-15);
    // unconstrained step lands halfway to the reflection
    EXPECT_NEAR(rec.c, 0.5, 1e-15);
}

TEST(CoordinateUpdate, StationaryCoordinate)
{
    const auto base = penalty(PenaltyKind::fused_graph, 2);
    auto st = DualState::from_alpha(base, vec({1, 1}), vec({0.3}));
    // move y back onto the hyperplane <r, y> = 0
    st.x = vec({1, 1}) + 0.3 * base.base_vector(0);
    st.refresh(base);
    TraceRecord rec;
    EXPECT_EQ(coordinate_update(st, 0, base, &rec), 0.0);
    EXPECT_EQ(st.alpha[0], 0.3);
    EXPECT_EQ(rec.c, 0.0);
}

TEST(DualState, RejectsInfeasibleAlpha)
{
    const auto base = penalty(PenaltyKind::isotonic_graph, 2);
    EXPECT_THROW(DualState::from_alpha(base, vec({0, 0}), vec({1.0})), Error);
    EXPECT_THROW(DualState::initial(base, vec({0, 0, 0})), DimensionMismatch);
}

TEST(SolveMinNorm, LassoSoftThresholds)
{
    const auto res = solve_min_norm(vec({3, -0.5, 0}), penalty(PenaltyKind::lasso, 3), tight);
    EXPECT_TRUE(res.converged);
    EXPECT_LT((res.fit - vec({2, 0, 0})).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SolveMinNorm, IsotonicPair)
{
    const auto res = solve_min_norm(vec({2, 1}), penalty(PenaltyKind::isotonic_graph, 2), tight);
    EXPECT_LT((res.fit - vec({1.5, 1.5})).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SolveMinNorm, TwoPointFused)
{
    const SolarBase base(2, {{{0, -1.0}, {1, 1.0}}}, {ExtInterval::symmetric(1.0 / std::sqrt(2.0))});
    const auto res = solve_min_norm(vec({0, 2}), base, tight);
    EXPECT_LT((res.fit - vec({0.5, 1.5})).cwiseAbs().maxCoeff(), 1e-14);
    // same instance from the user-facing penalty 0.5 |theta_2 - theta_1|
    const auto res2 = solve_min_norm(vec({0, 2}), penalty(PenaltyKind::fused_graph, 2, {0.5}), tight);
    EXPECT_LT((res2.fit - vec({0.5, 1.5})).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SolveMinNorm, FullLineIntervalForcesOrthogonality)
{
    // I = [-inf, inf] on (e1 - e2)/sqrt2: the fit is the projection onto its complement
    const SolarBase base(3, {{{0, -1.0}, {1, 1.0}}, {{2, 1.0}}}, {ExtInterval(-inf, inf), ExtInterval(-1, 1)});
    const auto res = solve_min_norm(vec({3, 1, 0.5}), base);
    EXPECT_TRUE(res.converged);
    EXPECT_NEAR(res.fit[0], 2.0, 1e-12);
    EXPECT_NEAR(res.fit[1], 2.0, 1e-12);
    EXPECT_NEAR(res.fit[2], 0.0, 1e-12);
}

TEST(SolveMinNorm, ZeroInputStaysZero)
{
    for (auto k : {PenaltyKind::lasso, PenaltyKind::fused_graph, PenaltyKind::isotonic_graph, PenaltyKind::trend_filter}) {
        const auto res = solve_min_norm(Vector::Zero(5), penalty(k, 5), tight);
        EXPECT_EQ(res.fit.norm(), 0.0);
        EXPECT_TRUE(res.converged);
    }
}

TEST(SolveMinNorm, NormIsMonotone)
{
    std::mt19937_64 rng(4);
    std::normal_distribution<double> nd;
    const Vector x = Vector::NullaryExpr(30, [&](Index) { return 2.0 * nd(rng); });
    const auto base = penalty(PenaltyKind::trend_filter, 30, {0.4});
    double prev = x.norm();
    std::size_t violations = 0, updates = 0;
    solve_min_norm(DualState::initial(base, x), base, tight, [&](const TraceRecord& r, const DualState&) {
        ++updates;
        if (r.norm_y > prev * (1.0 + 1e-12) + 1e-12) ++violations;
        prev = r.norm_y;
        EXPECT_GE(r.c, -1e-9);
        EXPECT_LE(r.c, 1.0 + 1e-9);
    });
    EXPECT_GT(updates, 0u);
    EXPECT_EQ(violations, 0u);
}

TEST(SolveMinNorm, KktAndFenchelPairing)
{
    std::mt19937_64 rng(8);
    std::normal_distribution<double> nd;
    for (auto k : {PenaltyKind::fused_graph, PenaltyKind::isotonic_graph, PenaltyKind::nearly_isotonic_graph,
                   PenaltyKind::trend_filter, PenaltyKind::nonneg}) {
        const Vector x = Vector::NullaryExpr(12, [&](Index) { return nd(rng); });
        const auto base = penalty(k, 12, {0.6});
        const auto res = solve_min_norm(x, base, tight);
        ASSERT_TRUE(res.converged) << to_string(k);
        EXPECT_LE(res.kkt_residual, 1e-8) << to_string(k);
        const Vector u = res.fit;
        const double h = support_function(base, u, 1e-9);
        EXPECT_GE((x - u).dot(u), h - 1e-7) << to_string(k);
        EXPECT_LE((x - u).dot(u), h + 1e-7) << to_string(k);
    }
}

TEST(SolveMinNorm, ShuffledOrderSameFit)
{
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd;
    const Vector x = Vector::NullaryExpr(40, [&](Index) { return nd(rng); });
    const auto base = penalty(PenaltyKind::fused_graph, 40, {0.7});
    SolveOptions shuffled = tight;
    shuffled.sweep_order = SweepOrder::cyclic_shuffled_once;
    shuffled.shuffle_seed = 17;
    const auto a = solve_min_norm(x, base, tight);
    const auto b = solve_min_norm(x, base, shuffled);
    EXPECT_LT((a.fit - b.fit).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((a.fit - taut_string(x, 0.7)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(SolveMinNorm, MoreauDecomposition)
{
    // prox of h_C plus projection onto C gives back v
    std::mt19937_64 rng(12);
    std::normal_distribution<double> nd;
    const auto base = penalty(PenaltyKind::fused_graph, 10, {0.8});
    const Vector v = Vector::NullaryExpr(10, [&](Index) { return nd(rng); });
    const Vector prox = prox_support(v, base, 1.0, tight).fit;
    const Vector proj = project_onto_support_set(v, base, tight);
    EXPECT_LT((prox + proj - v).norm(), 1e-12);
    // scaling the penalty by s is the prox of s h_C
    const Vector half = prox_support(v, base, 0.5, tight).fit;
    EXPECT_LT((half - taut_string(v, 0.4)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(SolveMinNorm, TraceCsv)
{
    SolveOptions o = tight;
    o.trace_enabled = true;
    const auto res = solve_min_norm(vec({2, 1}), penalty(PenaltyKind::isotonic_graph, 2), o);
    ASSERT_FALSE(res.trace.empty());
    std::ostringstream os;
    write_trace_csv(os, res.trace);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "sweep,j,alpha_old,alpha_new,c,norm_y");
}

TEST(SolveMinNorm, RejectsBadOptions)
{
    SolveOptions o;
    o.tol = 0.0;
    EXPECT_THROW(solve_min_norm(vec({1, 2}), penalty(PenaltyKind::lasso, 2), o), Error);
    EXPECT_THROW(solve_min_norm(vec({1, 2, 3}), penalty(PenaltyKind::lasso, 2)), DimensionMismatch);
}
