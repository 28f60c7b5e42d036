#include "driftlab/comparison.hpp"
#include "driftlab/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace driftlab;

TEST(EigenvalueBound, HandComputedValues)
{
    // lambda0 / (2 lambda0 (1 - e^s) + e^s)
    EXPECT_NEAR(eigenvalue_bound(0.25, std::log(2.0)), 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(eigenvalue_bound(1.0, std::log(4.0 / 3.0)), 1.5, 1e-14);
    EXPECT_EQ(eigenvalue_bound(0.5, 3.0), 0.5);
    EXPECT_EQ(eigenvalue_bound(0.7, 0.0), 0.7);
}

TEST(EigenvalueBound, CasesAndHorizons)
{
    EXPECT_EQ(bound_curve(0.2).bound_case, BoundCase::BelowHalf);
    EXPECT_EQ(bound_curve(0.5).bound_case, BoundCase::AtHalf);
    EXPECT_EQ(bound_curve(0.75).bound_case, BoundCase::AboveHalf);
    EXPECT_NEAR(blowup_horizon(1.0), std::log(2.0), 1e-15);
    EXPECT_NEAR(blowup_horizon(0.75), std::log(3.0), 1e-15);
    EXPECT_TRUE(std::isinf(blowup_horizon(0.5)));
    EXPECT_FALSE(bound_curve(1.0).valid_at(1.0));
}

TEST(EigenvalueBound, Errors)
{
    EXPECT_THROW(eigenvalue_bound(0.0, 1.0), DomainError);
    EXPECT_THROW(eigenvalue_bound(0.3, -0.1), DomainError);
    EXPECT_THROW(eigenvalue_bound(1.0, std::log(2.0)), HorizonError);
    try {
        eigenvalue_bound(1.0, 2.0);
        FAIL();
    } catch (const HorizonError& e) {
        EXPECT_NEAR(e.horizon(), std::log(2.0), 1e-15);
    }
}

TEST(EigenvalueBound, SolvesTheEqualityOde)
{
    for (double l : {0.1, 0.5, 0.9}) {
        for (double s : {0.0, 0.2, 0.5}) {
            const double h = 1e-6;
            const double b = eigenvalue_bound(l, s + h);
            const double d = (eigenvalue_bound(l, s + 2 * h) - eigenvalue_bound(l, s)) / (2 * h);
            EXPECT_NEAR(d, (2 * b - 1) * b, 1e-7);
        }
    }
}

TEST(EigenvalueBound, SemigroupProperty)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> lam(0.05, 3.0), frac(0.0, 0.45);
    for (int i = 0; i < 200; ++i) {
        const double l = lam(rng);
        const double h = std::min(blowup_horizon(l), 4.0);
        const double s1 = frac(rng) * h, s2 = frac(rng) * h;
        const double whole = eigenvalue_bound(l, s1 + s2);
        EXPECT_NEAR(eigenvalue_bound(eigenvalue_bound(l, s1), s2), whole, 1e-12 * whole);
    }
}

TEST(EigenvalueBound, MonotoneInInitialValue)
{
    for (double s : {0.1, 0.3}) {
        double prev = 0.0;
        for (double l = 0.05; l < 1.5; l += 0.05) {
            const double b = eigenvalue_bound(l, s);
            EXPECT_GT(b, prev);
            prev = b;
        }
    }
}

TEST(LogisticEnvelope, ValuesAndErrors)
{
    EXPECT_NEAR(logistic_envelope(0.5, std::log(3.0)), 0.25, 1e-15);
    EXPECT_EQ(logistic_envelope(1.0, 7.0), 1.0);
    EXPECT_EQ(logistic_envelope(0.0, 7.0), 0.0);
    EXPECT_THROW(logistic_envelope(1.5, 0.1), OutOfRegimeError);
    EXPECT_THROW(logistic_envelope(-0.1, 0.1), DomainError);
    EXPECT_THROW(logistic_envelope(0.5, -0.1), DomainError);
}

TEST(LinearComparison, Line)
{
    EXPECT_DOUBLE_EQ(linear_comparison(1.0, -0.5, 2.0), 0.0);
}

TEST(ForwardDiffCheck, AcceptsSubsolutionsAndRejectsViolations)
{
    std::vector<double> t, sub, super;
    for (int i = 0; i <= 20; ++i) {
        t.push_back(0.05 * i);
        sub.push_back(eigenvalue_bound(0.3, t.back()) - 0.01 * t.back());
        super.push_back(eigenvalue_bound(0.3, t.back()) + 0.05 * t.back());
    }
    auto g = [](double, double h) { return (2 * h - 1) * h; };
    EXPECT_TRUE(forward_diff_check(t, sub, g).passed);
    const auto bad = forward_diff_check(t, super, g, 1e-6);
    EXPECT_FALSE(bad.passed);
    EXPECT_GT(bad.observed_slack, 0.01);
    EXPECT_EQ(bad.intervals, 20u);
    EXPECT_THROW(forward_diff_check({0.0, 1.0}, {0.0, 1.0}, g), UsageError);
}
