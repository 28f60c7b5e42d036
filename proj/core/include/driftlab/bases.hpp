#pragma once

#include <Eigen/Dense>

#include <memory>

namespace driftlab {

enum class AxisKind { Circle, Line };

/// Spectral basis and quadrature for one factor of a product grid.
///
/// Circle axes use real Fourier modes |k| <= max_mode on uniform nodes
/// theta_j = 2 pi j / N with trapezoidal weights 2 pi / N. Line axes use
/// orthonormal Hermite polynomials for the weight e^{-x^2/4} on Gauss nodes,
/// so every integral of (polynomial of degree <= 2q - 1) * e^{-x^2/4} is exact.
struct AxisBasis {
    AxisKind kind = AxisKind::Circle;
    int max_mode = 0;

    Eigen::VectorXd nodes;
    /// Quadrature weights for the reference measure: d theta on the circle,
    /// e^{-x^2/4} dx on the line.
    Eigen::VectorXd reference_weights;
    /// log of the reference density at each node (0 on the circle, -x^2/4 on the line).
    Eigen::VectorXd log_reference_density;
    /// Frequency (circle) or polynomial degree (line) of every modal column.
    Eigen::VectorXi mode_order;

    Eigen::MatrixXd eval;      // nodes x modes
    Eigen::MatrixXd eval_d1;   // first derivative of each mode at the nodes
    Eigen::MatrixXd eval_d2;
    Eigen::MatrixXd analysis;  // modes x nodes, exact inverse of eval on its span
    Eigen::MatrixXd node_d1;   // nodes x nodes spectral differentiation
    Eigen::MatrixXd node_d2;

    int node_count() const { return static_cast<int>(nodes.size()); }
    int mode_count() const { return static_cast<int>(eval.cols()); }

    /// Coordinate quadrature weights (d theta or dx).
    Eigen::VectorXd coordinate_weights() const;
};

/// Cached, immutable Fourier basis on `nodes` uniform points with modes
/// |k| <= max_mode. A negative max_mode selects (nodes - 1) / 2, which drops
/// the Nyquist mode for even node counts.
std::shared_ptr<const AxisBasis> fourier_basis(int nodes, int max_mode = -1);

/// Cached, immutable orthonormal Hermite basis of `order` polynomials
/// (degrees 0 .. order-1) with `order` Gauss nodes.
std::shared_ptr<const AxisBasis> hermite_basis(int order);

}  // namespace driftlab
