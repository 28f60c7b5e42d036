#include "driftlab/field_ops.hpp"

#include "driftlab/errors.hpp"

namespace driftlab {

Eigen::VectorXd apply_axis(const std::vector<Eigen::Index>& shape, const Eigen::MatrixXd& op,
                           const Eigen::VectorXd& u, int axis)
{
    Eigen::Index inner = 1;
    for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
    Eigen::Index outer = 1;
    for (int i = 0; i < axis; ++i) outer *= shape[i];
    const Eigen::Index n = shape[axis];
    const Eigen::Index rows = op.rows();
    if (op.cols() != n || u.size() != outer * n * inner) {
        throw UsageError("apply_axis: operator or field does not match the grid");
    }

    Eigen::VectorXd out(outer * rows * inner);
    for (Eigen::Index o = 0; o < outer; ++o) {
        // Column-major view: entry (i, j) is node j on this axis, inner index i.
        Eigen::Map<const Eigen::MatrixXd> block(u.data() + o * n * inner, inner, n);
        Eigen::Map<Eigen::MatrixXd> dst(out.data() + o * rows * inner, inner, rows);
        dst.noalias() = block * op.transpose();
    }
    return out;
}

void require_compatible(const DiscreteWeightedManifold& dm, const Field& u, const char* what)
{
    if (u.size() != dm.size()) {
        throw UsageError(std::string(what) + ": field has " + std::to_string(u.size()) +
                         " samples, manifold grid has " + std::to_string(dm.size()));
    }
}

Field apply_axis(const DiscreteWeightedManifold& dm, const Eigen::MatrixXd& op, const Field& u, int axis)
{
    return apply_axis(dm.shape(), op, u, axis);
}

Field partial(const DiscreteWeightedManifold& dm, const Field& u, int axis)
{
    return apply_axis(dm, dm.factor(axis).basis->node_d1, u, axis);
}

Field partial2(const DiscreteWeightedManifold& dm, const Field& u, int axis)
{
    return apply_axis(dm, dm.factor(axis).basis->node_d2, u, axis);
}

VectorField gradient(const DiscreteWeightedManifold& dm, const Field& u)
{
    require_compatible(dm, u, "gradient");
    VectorField out;
    for (int i = 0; i < dm.dimension(); ++i) {
        const Field inv_g = dm.broadcast(dm.factor(i).metric.cwiseInverse(), i);
        out.push_back(partial(dm, u, i).cwiseProduct(inv_g));
    }
    return out;
}

Field gradient_inner(const DiscreteWeightedManifold& dm, const Field& u, const Field& v)
{
    require_compatible(dm, u, "gradient_inner");
    require_compatible(dm, v, "gradient_inner");
    Field out = Field::Zero(dm.size());
    for (int i = 0; i < dm.dimension(); ++i) {
        const Field inv_g = dm.broadcast(dm.factor(i).metric.cwiseInverse(), i);
        out.array() += partial(dm, u, i).array() * partial(dm, v, i).array() * inv_g.array();
    }
    return out;
}

Field hessian_component(const DiscreteWeightedManifold& dm, const Field& u, int axis_i, int axis_j)
{
    if (axis_i != axis_j) return partial(dm, partial(dm, u, axis_i), axis_j);
    const Field gamma = dm.broadcast(dm.factor(axis_i).christoffel(), axis_i);
    return partial2(dm, u, axis_i) - gamma.cwiseProduct(partial(dm, u, axis_i));
}

Field hessian_norm_sq_pointwise(const DiscreteWeightedManifold& dm, const Field& u)
{
    require_compatible(dm, u, "hessian_norm_sq");
    const int n = dm.dimension();
    std::vector<Field> inv_g;
    for (int i = 0; i < n; ++i) inv_g.push_back(dm.broadcast(dm.factor(i).metric.cwiseInverse(), i));
    Field out = Field::Zero(dm.size());
    for (int i = 0; i < n; ++i) {
        const Field h = hessian_component(dm, u, i, i);
        out.array() += (h.array() * inv_g[i].array()).square();
        for (int j = i + 1; j < n; ++j) {
            const Field m = hessian_component(dm, u, i, j);
            out.array() += 2.0 * m.array().square() * inv_g[i].array() * inv_g[j].array();
        }
    }
    return out;
}

Field laplacian(const DiscreteWeightedManifold& dm, const Field& u)
{
    require_compatible(dm, u, "laplacian");
    Field out = Field::Zero(dm.size());
    for (int i = 0; i < dm.dimension(); ++i) {
        const Field inv_g = dm.broadcast(dm.factor(i).metric.cwiseInverse(), i);
        out.array() += hessian_component(dm, u, i, i).array() * inv_g.array();
    }
    return out;
}

Field drift_laplacian(const DiscreteWeightedManifold& dm, const Field& u)
{
    require_compatible(dm, u, "drift_laplacian");
    Field out = Field::Zero(dm.size());
    for (int i = 0; i < dm.dimension(); ++i) {
        const auto& fac = dm.factor(i);
        const Field inv_g = dm.broadcast(fac.metric.cwiseInverse(), i);
        const Field gamma = dm.broadcast(fac.christoffel(), i);
        const Field df = dm.broadcast(fac.weight_d1, i);
        const Field du = partial(dm, u, i);
        out.array() += (partial2(dm, u, i).array() - (gamma.array() + df.array()) * du.array()) * inv_g.array();
    }
    return out;
}

double integrate(const DiscreteWeightedManifold& dm, const Field& samples)
{
    require_compatible(dm, samples, "integrate");
    return samples.dot(dm.measure());
}

}  // namespace driftlab
