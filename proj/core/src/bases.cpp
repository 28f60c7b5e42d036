#include "driftlab/bases.hpp"

#include "driftlab/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

namespace driftlab {

namespace {

std::shared_ptr<AxisBasis> build_fourier(int n, int max_mode)
{
    auto b = std::make_shared<AxisBasis>();
    b->kind = AxisKind::Circle;
    b->max_mode = max_mode;
    const int m = 2 * max_mode + 1;
    const double h = 2.0 * std::numbers::pi / n;

    b->nodes.resize(n);
    for (int j = 0; j < n; ++j) b->nodes[j] = h * j;
    b->reference_weights = Eigen::VectorXd::Constant(n, h);
    b->log_reference_density = Eigen::VectorXd::Zero(n);
    b->mode_order.resize(m);

    b->eval.resize(n, m);
    b->eval_d1.resize(n, m);
    b->eval_d2.resize(n, m);
    b->eval.col(0).setOnes();
    b->eval_d1.col(0).setZero();
    b->eval_d2.col(0).setZero();
    b->mode_order[0] = 0;
    for (int k = 1; k <= max_mode; ++k) {
        b->mode_order[2 * k - 1] = k;
        b->mode_order[2 * k] = k;
        for (int j = 0; j < n; ++j) {
            // Reduce k*j modulo n so the argument stays in [0, 2 pi).
            const double arg = h * static_cast<double>((static_cast<long>(k) * j) % n);
            const double c = std::cos(arg);
            const double s = std::sin(arg);
            b->eval(j, 2 * k - 1) = c;
            b->eval(j, 2 * k) = s;
            b->eval_d1(j, 2 * k - 1) = -k * s;
            b->eval_d1(j, 2 * k) = k * c;
            b->eval_d2(j, 2 * k - 1) = -k * k * c;
            b->eval_d2(j, 2 * k) = -k * k * s;
        }
    }

    // Discrete orthogonality for k < n/2: sum_j cos^2 = sum_j sin^2 = n/2.
    Eigen::VectorXd scale = Eigen::VectorXd::Constant(m, 2.0 / n);
    scale[0] = 1.0 / n;
    b->analysis = scale.asDiagonal() * b->eval.transpose();
    b->node_d1 = b->eval_d1 * b->analysis;
    b->node_d2 = b->eval_d2 * b->analysis;
    return b;
}

std::shared_ptr<AxisBasis> build_hermite(int q)
{
    auto b = std::make_shared<AxisBasis>();
    b->kind = AxisKind::Line;
    b->max_mode = q - 1;

    // Golub-Welsch for the probabilists' weight e^{-y^2/2}; x = sqrt(2) y.
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(q);
    Eigen::VectorXd sub(q > 1 ? q - 1 : 0);
    for (int k = 1; k < q; ++k) sub[k - 1] = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (tri.info() != Eigen::Success) {
        throw SolverError("Gauss-Hermite node computation failed", 0.0);
    }
    const double total = 2.0 * std::sqrt(std::numbers::pi);  // int e^{-x^2/4} dx
    Eigen::VectorXd x(q), w(q);
    for (int j = 0; j < q; ++j) {
        x[j] = std::sqrt(2.0) * tri.eigenvalues()[j];
        const double v0 = tri.eigenvectors()(0, j);
        w[j] = total * v0 * v0;
    }
    // Enforce exact mirror symmetry so odd integrands vanish to round-off.
    for (int j = 0; j < q / 2; ++j) {
        const int r = q - 1 - j;
        const double xs = 0.5 * (x[r] - x[j]);
        const double ws = 0.5 * (w[r] + w[j]);
        x[j] = -xs;
        x[r] = xs;
        w[j] = ws;
        w[r] = ws;
    }
    if (q % 2 == 1) x[q / 2] = 0.0;

    b->nodes = x;
    b->reference_weights = w;
    b->log_reference_density = -0.25 * x.array().square();
    b->mode_order = Eigen::VectorXi::LinSpaced(q, 0, q - 1);

    // Orthonormal p_k = He_k(x / sqrt 2) / sqrt(2 sqrt(pi) k!):
    //   p_{k+1} = (y p_k - sqrt(k) p_{k-1}) / sqrt(k + 1),  p_k' = sqrt(k / 2) p_{k-1}.
    b->eval.resize(q, q);
    const double p0 = 1.0 / std::sqrt(total);
    for (int j = 0; j < q; ++j) {
        const double y = x[j] / std::sqrt(2.0);
        b->eval(j, 0) = p0;
        if (q > 1) b->eval(j, 1) = y * p0;
        for (int k = 1; k + 1 < q; ++k) {
            b->eval(j, k + 1) = (y * b->eval(j, k) - std::sqrt(static_cast<double>(k)) * b->eval(j, k - 1)) /
                                std::sqrt(static_cast<double>(k + 1));
        }
    }
    b->eval_d1 = Eigen::MatrixXd::Zero(q, q);
    b->eval_d2 = Eigen::MatrixXd::Zero(q, q);
    for (int k = 1; k < q; ++k) {
        b->eval_d1.col(k) = std::sqrt(0.5 * k) * b->eval.col(k - 1);
    }
    for (int k = 2; k < q; ++k) {
        b->eval_d2.col(k) = 0.5 * std::sqrt(static_cast<double>(k) * (k - 1)) * b->eval.col(k - 2);
    }
    b->analysis = b->eval.transpose() * w.asDiagonal();
    b->node_d1 = b->eval_d1 * b->analysis;
    b->node_d2 = b->eval_d2 * b->analysis;
    return b;
}

}  // namespace

Eigen::VectorXd AxisBasis::coordinate_weights() const
{
    return (reference_weights.array() * (-log_reference_density.array()).exp()).matrix();
}

std::shared_ptr<const AxisBasis> fourier_basis(int nodes, int max_mode)
{
    if (nodes < 4) throw ConfigurationError("circle resolution must be at least 4 nodes");
    if (max_mode < 0) max_mode = (nodes - 1) / 2;
    if (2 * max_mode >= nodes) {
        throw ConfigurationError("Fourier mode cutoff " + std::to_string(max_mode) +
                                 " is not resolved by " + std::to_string(nodes) + " nodes");
    }
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const AxisBasis>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{nodes, max_mode}];
    if (!slot) slot = build_fourier(nodes, max_mode);
    return slot;
}

std::shared_ptr<const AxisBasis> hermite_basis(int order)
{
    if (order < 2) throw ConfigurationError("Hermite order must be at least 2");
    if (order > 150) throw ConfigurationError("Hermite order above 150 is not supported");
    static std::mutex mutex;
    static std::map<int, std::shared_ptr<const AxisBasis>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[order];
    if (!slot) slot = build_hermite(order);
    return slot;
}

}  // namespace driftlab
