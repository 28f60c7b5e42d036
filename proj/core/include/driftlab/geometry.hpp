#pragma once

#include "driftlab/bases.hpp"
#include "driftlab/trig_polynomial.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace driftlab {

/// Node samples of a scalar on the tensor grid of a DiscreteWeightedManifold.
/// Flattened row-major: the first factor varies slowest.
using Field = Eigen::VectorXd;

/// Circle factor with metric a(theta) d theta^2 (length^2) and weight term f(theta).
struct CircleFactor {
    TrigPolynomial metric;
    TrigPolynomial weight;
};

/// Line factor with metric u dx^2 and weight term x^2/4 + (1/2) log u.
/// The log term keeps e^{-f} sqrt(u) independent of u, so the weighted
/// measure of the factor is e^{-x^2/4} dx for every scale.
struct GaussianLineFactor {
    double scale = 1.0;
};

using FactorState = std::variant<CircleFactor, GaussianLineFactor>;

/// Continuum weighted manifold: product of flat factors, weight
/// f = sum of factor terms + weight_constant, at flow time `time`.
struct ContinuumState {
    std::vector<FactorState> factors;
    double weight_constant = 0.0;
    double time = 0.0;

    int dimension() const { return static_cast<int>(factors.size()); }
    int circle_count() const;

    /// Checks metric positivity (sampled densely on circles) and finiteness.
    /// Throws DomainError naming the violation.
    void validate() const;
};

class AnalyticFamily {
public:
    enum class Kind { ScaledGaussian, RoundCircle, Product };

    Kind kind() const { return kind_; }
    double reference_time() const { return t0_; }
    /// u(t0) for ScaledGaussian.
    double initial_scale() const { return scale0_; }
    /// Number of line factors for ScaledGaussian.
    int line_dimension() const { return lines_; }
    /// a(t0) for RoundCircle.
    double initial_metric() const { return metric0_; }
    double initial_weight() const { return weight0_; }
    const std::vector<AnalyticFamily>& children() const { return children_; }

    int dimension() const;
    /// First time at which u(t) reaches zero; +inf when the family never dies.
    double extinction_time() const;

    /// Exact state at time t. Throws ExtinctionError at or after extinction.
    ContinuumState evaluate(double t) const;

    /// Closed-form drift-Laplacian spectrum at t: the lowest `count` eigenvalues
    /// with multiplicity, ascending.
    std::vector<double> analytic_spectrum(double t, int count) const;

    std::string describe() const;

private:
    friend AnalyticFamily scaled_gaussian_family(double, int, double);
    friend AnalyticFamily round_circle_family(double, double, double);
    friend AnalyticFamily product_family(std::vector<AnalyticFamily>);

    void append_factors(double t, ContinuumState& state) const;
    std::vector<std::vector<double>> factor_spectra(double t, int count) const;

    Kind kind_ = Kind::ScaledGaussian;
    double t0_ = 0.0;
    double scale0_ = 1.0;
    int lines_ = 1;
    double metric0_ = 1.0;
    double weight0_ = 0.0;
    std::vector<AnalyticFamily> children_;
};

/// g = u(t) delta on R^n, f = |x|^2/4 + (n/2) log u(t), u(t) = 1 + (u0 - 1) e^{t - t0}.
AnalyticFamily scaled_gaussian_family(double u0, int n, double t0);

/// a(t) = a0 e^{t - t0}, f(t) = f0 + (t - t0)/2, both constant in theta.
AnalyticFamily round_circle_family(double a0, double t0, double f0 = 0.0);

/// Product of families sharing t0. Nested products are flattened. At most one
/// circle factor is supported.
AnalyticFamily product_family(std::vector<AnalyticFamily> factors);

ContinuumState evaluate_family(const AnalyticFamily& family, double t);

/// Sampled factor of a DiscreteWeightedManifold.
struct DiscreteFactor {
    AxisKind kind = AxisKind::Circle;
    std::shared_ptr<const AxisBasis> basis;
    Eigen::VectorXd metric;     // g_i at the nodes
    Eigen::VectorXd metric_d1;  // d g_i / d x_i
    Eigen::VectorXd weight;     // f_i
    Eigen::VectorXd weight_d1;
    Eigen::VectorXd weight_d2;
    /// Line factors only: the metric scale u.
    double scale = 1.0;

    int size() const { return basis->node_count(); }
    const Eigen::VectorXd& nodes() const { return basis->nodes; }
    /// Coordinate quadrature weights (2 pi / N on circles).
    Eigen::VectorXd quadrature_weights() const { return basis->coordinate_weights(); }
    /// e^{-f_i} sqrt(g_i) at the nodes.
    Eigen::VectorXd density() const;
    /// Quadrature weight times density: the factor's contribution to
    /// integral(.) e^{-f} dv.
    Eigen::VectorXd measure() const;
    /// Christoffel symbol (d g / dx) / (2 g) of the 1D metric.
    Eigen::VectorXd christoffel() const;
};

struct Resolution {
    int circle_nodes = 64;
    int hermite_order = 16;
};

constexpr int kMinCircleNodes = 8;
constexpr int kMinHermiteOrder = 4;

class DiscreteWeightedManifold {
public:
    DiscreteWeightedManifold() = default;
    DiscreteWeightedManifold(std::vector<DiscreteFactor> factors, double weight_constant, double time);

    int dimension() const { return static_cast<int>(factors_.size()); }
    const std::vector<DiscreteFactor>& factors() const { return factors_; }
    const DiscreteFactor& factor(int axis) const { return factors_.at(axis); }
    double weight_constant() const { return weight_constant_; }
    double time() const { return time_; }

    /// Total number of grid nodes.
    Eigen::Index size() const { return size_; }
    const std::vector<Eigen::Index>& shape() const { return shape_; }
    const std::vector<Eigen::Index>& strides() const { return strides_; }

    /// Repeat per-axis node values over the full grid.
    Field broadcast(const Eigen::VectorXd& axis_values, int axis) const;
    /// Evaluate fn(coordinates) at every node; coordinates[i] is the node
    /// coordinate on factor i (theta or x).
    Field sample(const std::function<double(std::span<const double>)>& fn) const;

    /// Full-grid quadrature measure: product of factor measures times e^{-c}.
    Field measure() const;
    /// Full-grid weight f.
    Field weight() const;
    /// Sum of the measure: integral e^{-f} dv.
    double total_volume() const;

    /// Ricci curvature component per axis and scalar curvature. Every supported
    /// factor is flat, so both vanish identically.
    Field ricci(int axis) const;
    Field scalar_curvature() const;

private:
    std::vector<DiscreteFactor> factors_;
    double weight_constant_ = 0.0;
    double time_ = 0.0;
    std::vector<Eigen::Index> shape_;
    std::vector<Eigen::Index> strides_;
    Eigen::Index size_ = 0;
};

/// Sample a continuum state. Circle factors use `circle_nodes` uniform nodes;
/// line factors use the Hermite basis of `hermite_order`.
/// Throws ConfigurationError below kMinCircleNodes / kMinHermiteOrder.
DiscreteWeightedManifold discretize(const ContinuumState& state, const Resolution& resolution);

}  // namespace driftlab
