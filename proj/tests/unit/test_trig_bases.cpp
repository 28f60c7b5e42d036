#include "driftlab/bases.hpp"
#include "driftlab/trig_polynomial.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace driftlab;

TEST(TrigPolynomial, EvaluatesAndDifferentiates)
{
    const auto p = TrigPolynomial::from_coefficients({1.0, 2.0, 0.0, 0.5}, {0.0, -1.0});
    const double th = 0.7;
    EXPECT_NEAR(p(th), 1.0 + 2.0 * std::cos(th) - std::sin(th) + 0.5 * std::cos(3 * th), 1e-15);
    EXPECT_NEAR(p.derivative_value(th, 1), -2.0 * std::sin(th) - std::cos(th) - 1.5 * std::sin(3 * th), 1e-14);
    EXPECT_NEAR(p.derivative()(th), p.derivative_value(th, 1), 1e-14);
    EXPECT_EQ(p.degree(), 3);
    EXPECT_FALSE(p.is_constant());
    EXPECT_TRUE(TrigPolynomial::constant(3.0).is_constant());
}

TEST(TrigPolynomial, ModalRoundTrip)
{
    const auto p = TrigPolynomial::from_coefficients({0.3, 0.1, -0.2}, {0.0, 0.4, 0.05});
    const auto q = TrigPolynomial::from_modal(p.modal(4));
    for (double th : {0.0, 1.0, 2.5, 5.0}) EXPECT_NEAR(p(th), q(th), 1e-15);
    EXPECT_NEAR(p.truncated(1)(1.0), 0.3 + 0.1 * std::cos(1.0) + 0.4 * std::sin(1.0), 1e-15);
}

TEST(FourierBasis, AnalysisInvertsEvaluation)
{
    const auto b = fourier_basis(16);
    const Eigen::MatrixXd id = b->analysis * b->eval;
    EXPECT_LT((id - Eigen::MatrixXd::Identity(id.rows(), id.cols())).norm(), 1e-13);
    EXPECT_NEAR(b->coordinate_weights().sum(), 2.0 * std::numbers::pi, 1e-13);
}

TEST(FourierBasis, SpectralDerivativeIsExactOnResolvedModes)
{
    const auto b = fourier_basis(32);
    Eigen::VectorXd u(b->node_count()), du(b->node_count());
    for (int j = 0; j < b->node_count(); ++j) {
        const double th = b->nodes[j];
        u[j] = std::sin(3 * th) + std::cos(5 * th);
        du[j] = 3 * std::cos(3 * th) - 5 * std::sin(5 * th);
    }
    EXPECT_LT((b->node_d1 * u - du).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(HermiteBasis, GaussianMomentsAreExact)
{
    const auto b = hermite_basis(8);
    const double sqrt_pi = std::sqrt(std::numbers::pi);
    const Eigen::VectorXd& x = b->nodes;
    const Eigen::VectorXd& w = b->reference_weights;
    EXPECT_NEAR(w.sum(), 2.0 * sqrt_pi, 1e-13);
    EXPECT_NEAR(w.dot(x.cwiseAbs2()), 4.0 * sqrt_pi, 1e-12);
    EXPECT_NEAR(w.dot(x.array().pow(4).matrix()), 24.0 * sqrt_pi, 1e-11);
    EXPECT_NEAR(w.dot(x), 0.0, 1e-13);
}

TEST(HermiteBasis, ModesAreOrthonormal)
{
    const auto b = hermite_basis(12);
    const Eigen::MatrixXd g = b->eval.transpose() * b->reference_weights.asDiagonal() * b->eval;
    EXPECT_LT((g - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff(), 1e-12);
}
