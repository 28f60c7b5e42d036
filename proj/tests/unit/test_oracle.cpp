#include "driftlab/comparison.hpp"
#include "driftlab/errors.hpp"
#include "driftlab/field_ops.hpp"
#include "driftlab/oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace driftlab;

TEST(DenseSpectrum, MatchesSeparationOfVariablesOnProducts)
{
    const auto fam = product_family({scaled_gaussian_family(1.5, 1, 0.0), round_circle_family(0.7, 0.0)});
    const auto dm = discretize(fam.evaluate(0.0), Resolution{24, 10});
    const auto forms = assemble_forms(dm);
    const auto dense = dense_spectrum(forms);
    const auto sep = lowest_eigenpairs(forms, 8);
    ASSERT_EQ(static_cast<Eigen::Index>(dense.size()), forms.dimension());
    for (std::size_t j = 0; j < sep.eigenvalues.size(); ++j) {
        EXPECT_NEAR(dense[j], sep.eigenvalues[j], 1e-10 * std::max(1.0, dense[j]));
    }
    const auto exact = fam.analytic_spectrum(0.0, 9);
    for (std::size_t j = 1; j < exact.size(); ++j) EXPECT_NEAR(dense[j], exact[j], 1e-10 * exact[j]);
}

TEST(DenseSpectrum, RejectsLargeProblems)
{
    const auto fam = product_family({scaled_gaussian_family(1.0, 1, 0.0), round_circle_family(1.0, 0.0)});
    const auto dm = discretize(fam.evaluate(0.0), Resolution{256, 16});
    EXPECT_THROW(dense_spectrum(assemble_forms(dm)), UsageError);
}

TEST(EqualityOde, AgreesWithClosedForm)
{
    for (double l : {0.2, 0.5, 0.8}) {
        for (double s : {0.1, 0.5, 0.9}) {
            if (!bound_curve(l).valid_at(s / 0.9)) continue;
            const double b = eigenvalue_bound(l, s);
            EXPECT_NEAR(integrate_equality_ode(l, s, 1e-3), b, 1e-10 * b);
        }
    }
    EXPECT_THROW(integrate_equality_ode(1.0, 1.0, 1e-3), HorizonError);
    EXPECT_THROW(integrate_equality_ode(0.3, 1.0, 0.0), UsageError);
}

TEST(QuadratureIntegral, MatchesFieldIntegration)
{
    const auto dm = discretize(scaled_gaussian_family(3.0, 1, 0.0).evaluate(0.0), Resolution{16, 12});
    const Field u = dm.sample([](std::span<const double> x) { return x[0] * x[0]; });
    EXPECT_NEAR(quadrature_integral(u, dm), integrate(dm, u), 1e-12);
    // integral of x^2 e^{-x^2/4} dx = 4 sqrt(pi)
    EXPECT_NEAR(quadrature_integral(u, dm), 4.0 * std::sqrt(M_PI), 1e-11);
}

TEST(FiniteDiffTimeDerivative, ExactOnQuadratics)
{
    std::vector<double> v;
    const double dt = 0.1;
    for (int i = 0; i < 6; ++i) v.push_back(3.0 * (i * dt) * (i * dt) - i * dt);
    const auto d = finite_diff_time_derivative(v, dt);
    for (int i = 0; i < 6; ++i) EXPECT_NEAR(d[i], 6.0 * i * dt - 1.0, 1e-12);
    EXPECT_THROW(finite_diff_time_derivative({1.0, 2.0}, dt), UsageError);
}

TEST(OracleReport, DigestAndDeviations)
{
    EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
    const auto r = make_report("t", {1.0}, {0.0, 2.0}, {1e-3, 2.2});
    EXPECT_NEAR(r.abs_deviation, 0.2, 1e-15);
    EXPECT_NEAR(r.rel_deviation, 0.1, 1e-15);
    EXPECT_EQ(r.inputs_digest.size(), 16u);
}
