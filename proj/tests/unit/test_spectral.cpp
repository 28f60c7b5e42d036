#include "driftlab/eigensolvers.hpp"
#include "driftlab/errors.hpp"
#include "driftlab/field_ops.hpp"
#include "driftlab/spectral.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace driftlab;

namespace {

DiscreteWeightedManifold wavy_circle(int nodes, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-0.1, 0.1);
    ContinuumState s;
    s.factors.push_back(CircleFactor{TrigPolynomial::from_coefficients({1.0, uni(rng), uni(rng)}, {0.0, uni(rng)}),
                                     TrigPolynomial::from_coefficients({0.0, 3 * uni(rng)}, {0.0, 3 * uni(rng)})});
    return discretize(s, Resolution{nodes, 8});
}

}  // namespace

TEST(LowestEigenpairs, RoundCircle)
{
    for (double a : {0.5, 2.0}) {
        const auto dm = discretize(round_circle_family(a, 0.0).evaluate(0.0), Resolution{64, 8});
        const auto r = lowest_eigenpairs(assemble_forms(dm), 6);
        const double expect[] = {0, 1, 1, 4, 4, 9, 9};
        EXPECT_EQ(r.eigenvalues[0], 0.0);
        for (int j = 1; j <= 6; ++j) EXPECT_NEAR(r.eigenvalues[j], expect[j] / a, 1e-10 * expect[j] / a);
    }
}

TEST(LowestEigenpairs, GaussianLine)
{
    const auto dm = discretize(scaled_gaussian_family(2.0, 1, 0.0).evaluate(0.0), Resolution{16, 16});
    const auto r = lowest_eigenpairs(assemble_forms(dm), 5);
    for (int j = 1; j <= 5; ++j) EXPECT_NEAR(r.eigenvalues[j], j / 4.0, 1e-13);
    // First eigenfunction is proportional to x.
    const Field x = dm.sample([](std::span<const double> c) { return c[0]; });
    const double c = dm.measure().dot(x.cwiseProduct(r.eigenfunctions[1]));
    EXPECT_NEAR(std::abs(c) * std::abs(c), dm.measure().dot(x.cwiseAbs2()), 1e-10);
}

TEST(LowestEigenpairs, EigenfunctionsAreWeightedOrthonormal)
{
    const auto dm = wavy_circle(48, 3);
    const auto r = lowest_eigenpairs(assemble_forms(dm), 5);
    for (std::size_t i = 0; i < r.eigenfunctions.size(); ++i) {
        for (std::size_t j = 0; j < r.eigenfunctions.size(); ++j) {
            const double jij = weighted_pairings(r.eigenfunctions[i], r.eigenfunctions[j], dm).J;
            EXPECT_NEAR(jij, i == j ? 1.0 : 0.0, 1e-10);
        }
        EXPECT_LT(r.residuals[i], 1e-10);
        if (i > 0) {
            EXPECT_NEAR(energy_profile(r.eigenfunctions[i], dm).F, r.eigenvalues[i], 1e-9 * r.eigenvalues[i]);
        }
    }
}

TEST(LowestEigenpairs, IterativeSolverMatchesClosedForm)
{
    const auto dm = discretize(round_circle_family(1.0, 0.0).evaluate(0.0), Resolution{1100, 8});
    const auto forms = assemble_forms(dm);
    ASSERT_GE(forms.factors[0].mass.rows(), kDenseThreshold);
    const auto r = lowest_eigenpairs(forms, 4);
    EXPECT_NEAR(r.eigenvalues[1], 1.0, 1e-9);
    EXPECT_NEAR(r.eigenvalues[4], 4.0, 1e-8);
}

TEST(LowestEigenpairs, RejectsBadCounts)
{
    const auto dm = discretize(scaled_gaussian_family(1.0, 1, 0.0).evaluate(0.0), Resolution{16, 6});
    const auto forms = assemble_forms(dm);
    EXPECT_THROW(lowest_eigenpairs(forms, 0), UsageError);
    EXPECT_THROW(lowest_eigenpairs(forms, 6), UsageError);
}

TEST(AssembleFactorForms, RejectsNonPositiveMetric)
{
    const auto dm = discretize(round_circle_family(1.0, 0.0).evaluate(0.0), Resolution{16, 6});
    DiscreteFactor f = dm.factor(0);
    f.metric[3] = -0.1;
    EXPECT_THROW(assemble_factor_forms(f), AssemblyError);
}

TEST(DeflatedEigenpairs, DenseMatchesLobpcg)
{
    const auto dm = wavy_circle(40, 11);
    const auto ff = assemble_factor_forms(dm.factor(0));
    const auto d = dense_deflated_eigenpairs(ff.stiffness, ff.mass, ff.kernel, 5);
    const auto l = lobpcg_deflated_eigenpairs(ff.stiffness, ff.mass, ff.kernel, 5);
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(d.values[i], l.values[i], 1e-9 * d.values[i]);
}

TEST(EnergyProfile, ZeroFunctionHasNoQuotient)
{
    const auto dm = wavy_circle(16, 1);
    EXPECT_THROW(energy_profile(Field::Zero(dm.size()), dm), UndefinedQuotientError);
}

TEST(Bochner, HoldsForRandomFunctionsOnWeightedCircles)
{
    std::mt19937_64 rng(99);
    std::normal_distribution<double> normal;
    for (unsigned seed = 0; seed < 5; ++seed) {
        const auto dm = wavy_circle(128, seed);
        std::vector<double> c(5), s(5);
        for (int k = 0; k < 5; ++k) {
            c[k] = normal(rng);
            s[k] = normal(rng);
        }
        const auto p = TrigPolynomial::from_coefficients(c, s);
        const Field u = dm.sample([&](std::span<const double> x) { return p(x[0]); });
        EXPECT_LT(bochner_terms(u, dm).relative(), 1e-9);
    }
}

TEST(Bochner, ShrinkerDefectVanishes)
{
    const auto dm = discretize(scaled_gaussian_family(1.0, 1, 0.0).evaluate(0.0), Resolution{16, 12});
    const Field u = dm.sample([](std::span<const double> x) { return x[0] * x[0] * x[0] - x[0]; });
    const auto t = bochner_terms(u, dm);
    EXPECT_NEAR(t.defect, 0.0, 1e-12);
    EXPECT_NEAR(t.identity, 0.0, 1e-9);
}

TEST(DriftDivergence, IntegratesToZero)
{
    const auto fam = product_family({scaled_gaussian_family(1.5, 1, 0.0), round_circle_family(2.0, 0.0)});
    const auto dm = discretize(fam.evaluate(0.0), Resolution{24, 12});
    VectorField v{dm.sample([](std::span<const double> x) { return x[0] * std::sin(x[1]); }),
                  dm.sample([](std::span<const double> x) { return std::cos(2 * x[1]) + x[0]; })};
    const double total = integrate(dm, drift_divergence(v, dm));
    EXPECT_NEAR(total, 0.0, 1e-11);
}

TEST(FixSign, LargestEntryBecomesPositive)
{
    Eigen::VectorXd v(3);
    v << 0.1, -2.0, 1.0;
    fix_sign(v);
    EXPECT_EQ(v[1], 2.0);
}
