#include "driftlab/errors.hpp"
#include "driftlab/field_ops.hpp"
#include "driftlab/flow.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace driftlab;

namespace {

ScenarioSpec family_spec(AnalyticFamily fam, double horizon, double interval, FlowBackend backend)
{
    ScenarioSpec s;
    s.family = std::move(fam);
    s.horizon = horizon;
    s.output_interval = interval;
    s.flow.backend = backend;
    return s;
}

ContinuumState wavy_state()
{
    ContinuumState s;
    s.factors.push_back(CircleFactor{TrigPolynomial::from_coefficients({1.0, 0.1, 0.02}, {0.0, 0.05}),
                                     TrigPolynomial::from_coefficients({0.0, 0.05}, {0.0, -0.02})});
    return s;
}

}  // namespace

TEST(FlowGrid, AtLeastFourNodesPerMode)
{
    FlowConfig cfg;
    cfg.mode_cutoff = 32;
    EXPECT_EQ(flow_grid_nodes(cfg), 128);
    cfg.resolution.circle_nodes = 200;
    EXPECT_EQ(flow_grid_nodes(cfg), 200);
}

TEST(FlowVelocity, RoundCircleExpandsAtUnitRate)
{
    const auto st = make_flow_state(round_circle_family(2.0, 0.0).evaluate(0.0), FlowConfig{});
    const auto v = flow_velocity(st);
    EXPECT_LT((v.metric_rate[0].array() - 2.0).abs().maxCoeff(), 1e-13);
    EXPECT_LT((v.weight_rate[0].array() - 0.5).abs().maxCoeff(), 1e-13);
}

TEST(StepModifiedFlow, RoundCircleStep)
{
    FlowConfig cfg;
    const auto st = make_flow_state(round_circle_family(1.0, 0.0).evaluate(0.0), cfg);
    const auto next = step_modified_flow(st, 0.01, cfg);
    EXPECT_NEAR(next.time(), 0.01, 1e-15);
    EXPECT_NEAR(next.manifold.factor(0).metric[5], std::exp(0.01), 1e-10);
    EXPECT_THROW(step_modified_flow(st, 0.0, cfg), ConfigurationError);
    EXPECT_THROW(step_modified_flow(st, 1.0, cfg), ConfigurationError);
}

TEST(RunFlow, RoundCircleSpectrumDecaysExponentially)
{
    const auto traj = run_flow(family_spec(round_circle_family(1.0, 0.0), 0.5, 0.1, FlowBackend::Galerkin));
    ASSERT_EQ(traj.spectra.size(), 6u);
    for (std::size_t j = 0; j < traj.spectra.size(); ++j) {
        const double t = traj.samples[traj.output_indices[j]].t;
        EXPECT_NEAR(t, 0.1 * j, 1e-12);
        EXPECT_NEAR(traj.spectra[j].eigenvalues[1], std::exp(-t), 1e-10);
        EXPECT_NEAR(traj.spectra[j].eigenvalues[3], 4.0 * std::exp(-t), 1e-9);
    }
    EXPECT_NEAR(traj.t1(), 0.5, 1e-12);
}

TEST(RunFlow, StaticSolitonStaysFixed)
{
    const auto traj = run_flow(family_spec(scaled_gaussian_family(1.0, 1, 0.0), 0.3, 0.1, FlowBackend::Galerkin));
    for (const auto& s : traj.samples) {
        EXPECT_NEAR(s.state.manifold.factor(0).scale, 1.0, 1e-14);
        EXPECT_LT(s.state.defect[0].cwiseAbs().maxCoeff(), 1e-12);
    }
    for (const auto& sp : traj.spectra) EXPECT_NEAR(sp.eigenvalues[1], 0.5, 1e-13);
}

TEST(RunFlow, BackendsAgreeOnGaussianProduct)
{
    const auto fam = product_family({scaled_gaussian_family(2.0, 1, 0.0), round_circle_family(0.5, 0.0)});
    const auto a = run_flow(family_spec(fam, 0.2, 0.1, FlowBackend::Analytic));
    const auto g = run_flow(family_spec(fam, 0.2, 0.1, FlowBackend::Galerkin));
    ASSERT_EQ(a.spectra.size(), g.spectra.size());
    for (std::size_t j = 0; j < a.spectra.size(); ++j) {
        for (std::size_t i = 0; i < a.spectra[j].eigenvalues.size(); ++i) {
            EXPECT_NEAR(a.spectra[j].eigenvalues[i], g.spectra[j].eigenvalues[i], 1e-9);
        }
    }
}

TEST(RunFlow, IsDeterministic)
{
    ScenarioSpec s;
    s.initial_state = wavy_state();
    s.horizon = 0.02;
    s.output_interval = 0.01;
    s.flow.mode_cutoff = 8;
    s.scalars = {eigen_scalar({1})};
    const auto a = run_flow(s);
    const auto b = run_flow(s);
    for (std::size_t j = 0; j < a.spectra.size(); ++j) {
        EXPECT_EQ(a.spectra[j].eigenvalues, b.spectra[j].eigenvalues);
    }
    EXPECT_EQ(a.samples.back().scalars[0], b.samples.back().scalars[0]);
}

TEST(RunFlow, ShrinkingGaussianBreaksDown)
{
    const auto fam = scaled_gaussian_family(0.5, 1, 0.0);
    EXPECT_THROW(run_flow(family_spec(fam, 1.0, 0.1, FlowBackend::Galerkin)), FlowBreakdownError);
    EXPECT_THROW(run_flow(family_spec(fam, 1.0, 0.1, FlowBackend::Analytic)), ExtinctionError);
}

TEST(RunFlow, StabilityMonitorTrips)
{
    ScenarioSpec s;
    s.initial_state = wavy_state();
    s.horizon = 0.05;
    s.flow.mode_cutoff = 8;
    s.flow.stability_threshold = 1.0001;
    EXPECT_THROW(run_flow(s), StabilityError);
}

TEST(RunFlow, RejectsInconsistentSpecs)
{
    ScenarioSpec s;
    EXPECT_THROW(run_flow(s), ConfigurationError);
    s.initial_state = wavy_state();
    s.flow.backend = FlowBackend::Analytic;
    EXPECT_THROW(run_flow(s), ConfigurationError);
}

TEST(EvolveScalar, CosineOnExpandingCircle)
{
    // u_t = L u + u/2 with L cos = -e^{-t} cos gives u = exp(t/2 + e^{-t} - 1) cos.
    const auto traj = run_flow(family_spec(round_circle_family(1.0, 0.0), 0.4, 0.1, FlowBackend::Galerkin));
    const auto& dm0 = traj.samples.front().state.manifold;
    const Field u0 = dm0.sample([](std::span<const double> x) { return std::cos(x[0]); });
    const auto series = evolve_scalar(u0, traj);
    ASSERT_EQ(series.size(), traj.samples.size());
    for (std::size_t i = 0; i < series.size(); i += 50) {
        const double t = traj.samples[i].t;
        const double amp = std::exp(0.5 * t + std::exp(-t) - 1.0);
        EXPECT_LT((series[i] - amp * u0).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(Functionals, IdentitiesOnTrackedScalars)
{
    auto s = family_spec(scaled_gaussian_family(2.0, 1, 0.0), 0.3, 0.1, FlowBackend::Galerkin);
    s.scalars = {eigen_scalar({1}), eigen_scalar({1, 2})};
    const auto traj = run_flow(s);
    const auto rep = functional_residuals(traj);
    EXPECT_LT(rep.max_pair_residual, 1e-5);
    EXPECT_LT(rep.max_energy_residual, 1e-5);
    EXPECT_LE(rep.max_energy_increase, 1e-12);
    EXPECT_LT(rep.max_volume_drift, 1e-12);
    EXPECT_LT(rep.max_mean, 1e-12);
    ASSERT_EQ(rep.times.size(), traj.samples.size());
    // A Gaussian eigenfunction keeps F = lambda_1(t).
    const std::size_t last = rep.times.size() - 1;
    EXPECT_NEAR(rep.F[0][last], traj.spectra.back().eigenvalues[1], 1e-8);
}

TEST(GramSchmidt, FrameIsOrthonormalAndDetectsDependence)
{
    const auto traj = run_flow(family_spec(round_circle_family(1.0, 0.0), 0.1, 0.1, FlowBackend::Galerkin));
    const auto& st = traj.samples.front().state;
    const auto& ef = traj.spectra.front().eigenfunctions;
    const auto gs = gram_schmidt_frame({ef[1] + ef[2], ef[2]}, st);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            EXPECT_NEAR(weighted_pairings(gs.frame[i], gs.frame[j], st.manifold).J, i == j ? 1.0 : 0.0, 1e-12);
        }
    }
    EXPECT_EQ(gs.mixing(0, 1), 0.0);
    EXPECT_THROW(gram_schmidt_frame({ef[1], 2.0 * ef[1]}, st), DegeneracyError);
}

TEST(Commutator, StaticSolitonAndExpandingCircle)
{
    const auto g = run_flow(family_spec(scaled_gaussian_family(1.0, 1, 0.0), 0.1, 0.05, FlowBackend::Galerkin));
    const Field x = g.samples.front().state.manifold.sample([](std::span<const double> c) { return c[0] * c[0]; });
    EXPECT_LT(commutator_residual(x, g, 10).absolute, 1e-12);
    const auto c = run_flow(family_spec(round_circle_family(1.0, 0.0), 0.1, 0.05, FlowBackend::Galerkin));
    const Field u = c.samples.front().state.manifold.sample([](std::span<const double> p) { return std::sin(2 * p[0]); });
    EXPECT_LT(commutator_residual(u, c, 0).relative, 1e-5);
    EXPECT_LT(commutator_residual(u, c, 50).relative, 1e-5);
    EXPECT_THROW(commutator_residual(u, c, c.samples.size()), UsageError);
}
