#pragma once

#include "driftlab/field_ops.hpp"
#include "driftlab/geometry.hpp"

#include <Eigen/Dense>

#include <vector>

namespace driftlab {

/// Galerkin matrices of one factor in its modal basis:
///   mass      M = B^T diag(mu) B,        mu = quadrature * e^{-f} sqrt(g)
///   stiffness K = B1^T diag(mu / g) B1
/// `kernel` holds the modal coefficients of the constant function 1.
struct FactorForms {
    Eigen::MatrixXd mass;
    Eigen::MatrixXd stiffness;
    Eigen::VectorXd kernel;
};

/// Builds the factor forms using the first `modes` modal columns (all when negative).
/// Throws AssemblyError when a metric sample is not positive.
FactorForms assemble_factor_forms(const DiscreteFactor& factor, int modes = -1);

/// Mass and stiffness forms of the weighted manifold. The global forms are the
/// tensor products  J = e^{-c} (M_1 x ... x M_n)  and
/// D = e^{-c} sum_i (M_1 x ... x K_i x ... x M_n).
struct QuadraticForms {
    DiscreteWeightedManifold manifold;
    std::vector<FactorForms> factors;

    /// Quadrature pairings of node fields.
    double J(const Field& u, const Field& v) const;
    double D(const Field& u, const Field& v) const;
    /// Discrete dimension (product of factor mode counts).
    Eigen::Index dimension() const;
};

QuadraticForms assemble_forms(const DiscreteWeightedManifold& dm);

struct SpectralResult {
    double t = 0.0;
    /// lambda_0 <= lambda_1 <= ... with multiplicity; lambda_0 = 0 exactly.
    std::vector<double> eigenvalues;
    /// Node samples, J-orthonormal.
    std::vector<Field> eigenfunctions;
    /// Relative residuals of the generalized eigen-equation.
    std::vector<double> residuals;
};

constexpr double kDefaultSolverTolerance = 1e-10;
/// Factor dimension at which the dense solve gives way to LOBPCG.
constexpr Eigen::Index kDenseThreshold = 512;

/// The k + 1 lowest eigenpairs (including the constant). Products are solved
/// by separation of variables; each factor is deflated against constants.
/// Throws UsageError when k is not below the discrete dimension and
/// SolverError when the iterative solver fails.
SpectralResult lowest_eigenpairs(const QuadraticForms& forms, int k, double tol = kDefaultSolverTolerance);

struct Pairings {
    double J = 0.0;
    double D = 0.0;
};

Pairings weighted_pairings(const Field& u, const Field& v, const DiscreteWeightedManifold& dm);

struct EnergyProfile {
    double I = 0.0;
    double E = 0.0;
    double F = 0.0;
};

/// I = J(u,u), E = D(u,u), F = E / I. Throws UndefinedQuotientError when I is zero.
EnergyProfile energy_profile(const Field& u, const DiscreteWeightedManifold& dm);

/// Integral of |Hess u|^2 e^{-f} dv.
double hessian_norm_sq(const Field& u, const DiscreteWeightedManifold& dm);

/// Pointwise soliton defect phi(grad u, grad u) with phi = g/2 - Hess f - Ric.
Field defect_quadratic(const DiscreteWeightedManifold& dm, const Field& u);

struct BochnerTerms {
    double defect = 0.0;    // integral of phi(grad u, grad u) e^{-f}
    double identity = 0.0;  // integral of (|Hess u|^2 + |grad u|^2 / 2 - (L u)^2) e^{-f}
    double residual = 0.0;  // |defect - identity|
    /// residual / max(|defect|, |identity|), zero when both sides vanish.
    double relative() const;
};

BochnerTerms bochner_terms(const Field& u, const DiscreteWeightedManifold& dm);
double bochner_residual(const Field& u, const DiscreteWeightedManifold& dm);

/// div V - <V, grad f> for V in coordinate components.
Field drift_divergence(const VectorField& v, const DiscreteWeightedManifold& dm);

/// Scale an eigenvector so its largest-magnitude entry is positive.
void fix_sign(Eigen::Ref<Eigen::VectorXd> v);

}  // namespace driftlab
