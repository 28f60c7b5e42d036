#include "driftlab/errors.hpp"
#include "driftlab/field_ops.hpp"
#include "driftlab/splitting.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace driftlab;

namespace {

FlowTrajectory run(AnalyticFamily fam, double horizon, FlowBackend backend)
{
    ScenarioSpec s;
    s.family = std::move(fam);
    s.horizon = horizon;
    s.output_interval = 0.1;
    s.flow.backend = backend;
    return run_flow(s);
}

}  // namespace

TEST(DetectSplitting, StaticLineTimesCircle)
{
    const auto traj =
        run(product_family({scaled_gaussian_family(1.0, 1, 0.0), round_circle_family(0.25, 0.0)}), 0.3,
            FlowBackend::Analytic);
    const auto out = detect_splitting(traj, 0.0, traj.t1());
    ASSERT_TRUE(out.fired());
    const auto& c = *out.certificate;
    EXPECT_TRUE(c.valid);
    EXPECT_EQ(c.k, 1);
    EXPECT_EQ(c.sampled_times, 4u);
    EXPECT_NEAR(c.lambda_k_t0, 0.5, 1e-12);
    EXPECT_GE(c.lambda_1_t1, 0.5 - 1e-12);
    EXPECT_LT(c.residuals.hessian_energy[0], 1e-10);
    EXPECT_LT(c.residuals.gradient_norm_deviation, 1e-8);
    EXPECT_NEAR(c.residuals.gradient_mean, 1.0, 1e-8);
    EXPECT_LT(c.residuals.metric_block, 1e-8);
}

TEST(DetectSplitting, TwoStaticLines)
{
    const auto traj = run(scaled_gaussian_family(1.0, 2, 0.0), 0.2, FlowBackend::Analytic);
    const auto out = detect_splitting(traj, 0.0, traj.t1());
    ASSERT_TRUE(out.fired());
    EXPECT_EQ(out.certificate->k, 2);
    EXPECT_TRUE(out.certificate->valid);
    EXPECT_LT(out.certificate->residuals.gradient_cross, 1e-8);
}

TEST(DetectSplitting, GalerkinProfile)
{
    const auto traj =
        run(product_family({scaled_gaussian_family(1.0, 1, 0.0), round_circle_family(0.25, 0.0)}), 0.2,
            FlowBackend::Galerkin);
    const auto out = detect_splitting(traj, 0.0, traj.t1(), SplittingTolerances::galerkin());
    ASSERT_TRUE(out.fired());
    EXPECT_TRUE(out.certificate->valid);
}

TEST(DetectSplitting, HypothesisFailures)
{
    const auto g = run(scaled_gaussian_family(2.0, 1, 0.0), 0.2, FlowBackend::Analytic);
    const auto a = detect_splitting(g, 0.0, g.t1());
    ASSERT_FALSE(a.fired());
    ASSERT_TRUE(a.failure);
    // lambda_2 = 1/2 at t0, but lambda_1 = 1/4 < 1/2.
    ASSERT_EQ(a.failure->violated.size(), 1u);
    EXPECT_EQ(a.failure->violated.front(), "lambda_1(t1) >= 1/2");
    EXPECT_NEAR(a.failure->lambda_k_t0, 0.5, 1e-12);

    const auto c = run(round_circle_family(4.0, 0.0), 0.2, FlowBackend::Analytic);
    const auto b = detect_splitting(c, 0.0, c.t1());
    ASSERT_TRUE(b.failure);
    EXPECT_EQ(b.failure->violated.front(), "lambda_k(t0) = 1/2");

    // lambda_1 = 1/2 at t0 but the shrinking circle drops below 1/2 later.
    const auto p = run(product_family({scaled_gaussian_family(1.0, 1, 0.0), round_circle_family(1.9, 0.0)}), 0.3,
                       FlowBackend::Analytic);
    const auto f = detect_splitting(p, 0.0, p.t1());
    ASSERT_TRUE(f.failure);
    EXPECT_EQ(f.failure->violated.back(), "lambda_1(t1) >= 1/2");
}

TEST(DetectSplitting, RequiresOutputTimes)
{
    const auto g = run(scaled_gaussian_family(1.0, 1, 0.0), 0.2, FlowBackend::Analytic);
    EXPECT_THROW(detect_splitting(g, 0.0, 0.05), UsageError);
    EXPECT_THROW(detect_splitting(g, 0.1, 0.1), UsageError);
}

TEST(NormalizeDirections, UnitMeanGradient)
{
    const auto dm = discretize(scaled_gaussian_family(1.0, 1, 0.0).evaluate(0.0), Resolution{16, 8});
    const Field x = dm.sample([](std::span<const double> c) { return 3.0 * c[0]; });
    const auto d = normalize_directions({x}, dm);
    EXPECT_NEAR(integrate(dm, gradient_inner(dm, d[0], d[0])) / dm.total_volume(), 1.0, 1e-13);
    EXPECT_THROW(normalize_directions({Field::Ones(dm.size())}, dm), DegeneracyError);
}
