#include "driftlab/errors.hpp"
#include "driftlab/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace driftlab;

TEST(ContinuumState, RejectsNonPositiveMetric)
{
    ContinuumState s;
    s.factors.push_back(CircleFactor{TrigPolynomial::from_coefficients({0.5, 1.0}, {}), TrigPolynomial{}});
    EXPECT_THROW(s.validate(), DomainError);
    ContinuumState line;
    line.factors.push_back(GaussianLineFactor{-1.0});
    EXPECT_THROW(line.validate(), DomainError);
}

TEST(AnalyticFamily, ScaledGaussianScaleAndExtinction)
{
    const auto fam = scaled_gaussian_family(0.5, 1, 0.0);
    EXPECT_NEAR(fam.extinction_time(), std::log(2.0), 1e-15);
    const auto st = fam.evaluate(0.3);
    EXPECT_NEAR(std::get<GaussianLineFactor>(st.factors[0]).scale, 1.0 - 0.5 * std::exp(0.3), 1e-15);
    EXPECT_THROW(fam.evaluate(0.7), ExtinctionError);
    EXPECT_TRUE(std::isinf(scaled_gaussian_family(2.0, 1, 0.0).extinction_time()));
    EXPECT_THROW(scaled_gaussian_family(-1.0, 1, 0.0), DomainError);
    EXPECT_THROW(round_circle_family(-1.0, 0.0), DomainError);
}

TEST(AnalyticFamily, ClosedFormSpectra)
{
    const auto g = scaled_gaussian_family(2.0, 1, 0.0).analytic_spectrum(0.0, 4);
    ASSERT_EQ(g.size(), 4u);
    EXPECT_DOUBLE_EQ(g[1], 0.25);
    EXPECT_DOUBLE_EQ(g[3], 0.75);
    const auto c = round_circle_family(1.0, 0.0).analytic_spectrum(std::log(2.0), 5);
    EXPECT_NEAR(c[1], 0.5, 1e-15);
    EXPECT_NEAR(c[2], 0.5, 1e-15);
    EXPECT_NEAR(c[3], 2.0, 1e-14);
    const auto p = product_family({scaled_gaussian_family(1.0, 1, 0.0), round_circle_family(0.25, 0.0)})
                       .analytic_spectrum(0.0, 4);
    EXPECT_DOUBLE_EQ(p[1], 0.5);
    EXPECT_DOUBLE_EQ(p[2], 1.0);
    EXPECT_THROW(product_family({round_circle_family(1.0, 0.0), round_circle_family(1.0, 0.0)}),
                 ConfigurationError);
}

TEST(DiscreteWeightedManifold, WeightedVolumes)
{
    const auto circle = discretize(round_circle_family(4.0, 0.0).evaluate(0.0), Resolution{32, 8});
    EXPECT_NEAR(circle.total_volume(), 4.0 * std::numbers::pi, 1e-12);
    // The weighted line measure is e^{-x^2/4} dx for every scale.
    for (double u : {0.5, 1.0, 3.0}) {
        const auto line = discretize(scaled_gaussian_family(u, 1, 0.0).evaluate(0.0), Resolution{32, 8});
        EXPECT_NEAR(line.total_volume(), 2.0 * std::sqrt(std::numbers::pi), 1e-12);
    }
}

TEST(DiscreteWeightedManifold, ProductGridLayout)
{
    const auto fam = product_family({scaled_gaussian_family(1.0, 1, 0.0), round_circle_family(1.0, 0.0)});
    const auto dm = discretize(fam.evaluate(0.0), Resolution{16, 6});
    EXPECT_EQ(dm.size(), 96);
    const Field x = dm.sample([](std::span<const double> c) { return c[0]; });
    const Field bx = dm.broadcast(dm.factor(0).nodes(), 0);
    EXPECT_LT((x - bx).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(dm.scalar_curvature().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Discretize, RejectsTooCoarseGrids)
{
    const auto st = round_circle_family(1.0, 0.0).evaluate(0.0);
    EXPECT_THROW(discretize(st, Resolution{kMinCircleNodes - 1, 8}), ConfigurationError);
    const auto line = scaled_gaussian_family(1.0, 1, 0.0).evaluate(0.0);
    EXPECT_THROW(discretize(line, Resolution{16, kMinHermiteOrder - 1}), ConfigurationError);
}
