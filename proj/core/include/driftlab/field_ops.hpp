#pragma once

#include "driftlab/geometry.hpp"

#include <vector>

namespace driftlab {

/// Apply a (rows x n_axis) operator along one axis of a grid field.
/// `rows` may differ from the axis length (e.g. node -> modal transforms); the
/// returned field then lives on the grid with that axis resized.
Eigen::VectorXd apply_axis(const std::vector<Eigen::Index>& shape, const Eigen::MatrixXd& op,
                           const Eigen::VectorXd& u, int axis);
Field apply_axis(const DiscreteWeightedManifold& dm, const Eigen::MatrixXd& op, const Field& u, int axis);

/// Spectral coordinate derivatives d u / d x_axis and d^2 u / d x_axis^2.
Field partial(const DiscreteWeightedManifold& dm, const Field& u, int axis);
Field partial2(const DiscreteWeightedManifold& dm, const Field& u, int axis);

/// Contravariant vector field: one component field per axis, in coordinate
/// basis (V = sum_i V^i d/dx_i).
using VectorField = std::vector<Field>;

/// grad u in coordinate components: (grad u)^i = g_i^{-1} d_i u.
VectorField gradient(const DiscreteWeightedManifold& dm, const Field& u);
/// Pointwise <grad u, grad v>.
Field gradient_inner(const DiscreteWeightedManifold& dm, const Field& u, const Field& v);
/// Pointwise |Hess u|^2 for the diagonal product metric.
Field hessian_norm_sq_pointwise(const DiscreteWeightedManifold& dm, const Field& u);
/// Hess u (d_i, d_j) in coordinates.
Field hessian_component(const DiscreteWeightedManifold& dm, const Field& u, int axis_i, int axis_j);
/// Laplace-Beltrami operator of the product metric.
Field laplacian(const DiscreteWeightedManifold& dm, const Field& u);
/// Drift Laplacian L u = Delta u - <grad f, grad u>.
Field drift_laplacian(const DiscreteWeightedManifold& dm, const Field& u);

/// Weighted integral sum(samples * measure).
double integrate(const DiscreteWeightedManifold& dm, const Field& samples);

void require_compatible(const DiscreteWeightedManifold& dm, const Field& u, const char* what);

}  // namespace driftlab
