#include "driftlab/eigensolvers.hpp"

#include "driftlab/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace driftlab {

namespace {

// Householder reflector H with H e_0 proportional to c; columns 1.. of H span c^perp.
Eigen::MatrixXd complement_basis(const Eigen::VectorXd& c)
{
    const Eigen::Index m = c.size();
    Eigen::VectorXd v = c;
    const double alpha = (c[0] >= 0.0 ? 1.0 : -1.0) * c.norm();
    v[0] += alpha;
    const double vv = v.squaredNorm();
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(m, m);
    if (vv > 0.0) h -= (2.0 / vv) * v * v.transpose();
    return h.rightCols(m - 1);
}

// M-orthonormalize the columns of s, dropping numerically dependent directions.
Eigen::MatrixXd svqb(const Eigen::MatrixXd& mass, Eigen::MatrixXd s)
{
    for (int pass = 0; pass < 2; ++pass) {
        Eigen::MatrixXd g = s.transpose() * (mass * s);
        g = 0.5 * (g + g.transpose());
        Eigen::VectorXd d = g.diagonal().cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt().cwiseInverse();
        Eigen::MatrixXd gs = d.asDiagonal() * g * d.asDiagonal();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gs);
        const Eigen::VectorXd& theta = eig.eigenvalues();
        const double cut = 1e-14 * theta.maxCoeff();
        std::vector<Eigen::Index> keep;
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
            if (theta[i] > cut) keep.push_back(i);
        }
        Eigen::MatrixXd u(s.cols(), static_cast<Eigen::Index>(keep.size()));
        for (std::size_t j = 0; j < keep.size(); ++j) {
            u.col(static_cast<Eigen::Index>(j)) = eig.eigenvectors().col(keep[j]) / std::sqrt(theta[keep[j]]);
        }
        s = s * (d.asDiagonal() * u);
    }
    return s;
}

}  // namespace

Eigen::VectorXd pencil_residuals(const Eigen::MatrixXd& stiffness, const Eigen::MatrixXd& mass,
                                 const Eigen::VectorXd& values, const Eigen::MatrixXd& vectors)
{
    Eigen::VectorXd out(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const Eigen::VectorXd kx = stiffness * vectors.col(i);
        const Eigen::VectorXd mx = mass * vectors.col(i);
        const double denom = kx.norm() + std::abs(values[i]) * mx.norm();
        const double r = (kx - values[i] * mx).norm();
        out[i] = denom > 0.0 ? r / denom : r;
    }
    return out;
}

PencilEigenpairs dense_deflated_eigenpairs(const Eigen::MatrixXd& stiffness, const Eigen::MatrixXd& mass,
                                           const Eigen::VectorXd& kernel, int count)
{
    const Eigen::Index m = stiffness.rows();
    if (count < 0 || count > m - 1) throw UsageError("requested more eigenpairs than the deflated dimension");
    PencilEigenpairs out;
    if (count == 0) {
        out.values.resize(0);
        out.vectors.resize(m, 0);
        out.residuals.resize(0);
        return out;
    }
    const Eigen::MatrixXd z = complement_basis(mass * kernel);
    Eigen::MatrixXd kr = z.transpose() * stiffness * z;
    Eigen::MatrixXd mr = z.transpose() * mass * z;
    kr = 0.5 * (kr + kr.transpose());
    mr = 0.5 * (mr + mr.transpose());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(kr, mr, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (eig.info() != Eigen::Success) throw SolverError("dense generalized eigensolve failed", 0.0);
    out.values = eig.eigenvalues().head(count);
    out.vectors = z * eig.eigenvectors().leftCols(count);
    // Re-normalize against the full mass form to remove the reduction round-off.
    for (int i = 0; i < count; ++i) {
        out.vectors.col(i) /= std::sqrt(out.vectors.col(i).dot(mass * out.vectors.col(i)));
    }
    out.residuals = pencil_residuals(stiffness, mass, out.values, out.vectors);
    return out;
}

PencilEigenpairs lobpcg_deflated_eigenpairs(const Eigen::MatrixXd& stiffness, const Eigen::MatrixXd& mass,
                                            const Eigen::VectorXd& kernel, int count, const LobpcgOptions& options)
{
    const Eigen::Index m = stiffness.rows();
    if (count < 1 || count > m - 1) throw UsageError("requested more eigenpairs than the deflated dimension");
    const Eigen::Index block = std::min<Eigen::Index>(count + options.guard_vectors, m - 1);

    const Eigen::VectorXd c = mass * kernel;
    const double ce = c.dot(kernel);
    auto project = [&](Eigen::MatrixXd& s) { s -= kernel * ((c.transpose() * s) / ce); };

    std::mt19937_64 rng(0x5eedULL);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Eigen::MatrixXd x(m, block);
    for (Eigen::Index j = 0; j < block; ++j) {
        for (Eigen::Index i = 0; i < m; ++i) x(i, j) = uni(rng);
    }
    project(x);
    x = svqb(mass, x);

    auto rayleigh_ritz = [&](const Eigen::MatrixXd& s, Eigen::VectorXd& theta, Eigen::MatrixXd& coeffs) {
        Eigen::MatrixXd a = s.transpose() * (stiffness * s);
        a = 0.5 * (a + a.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
        theta = eig.eigenvalues();
        coeffs = eig.eigenvectors();
    };

    Eigen::VectorXd theta;
    Eigen::MatrixXd coeffs;
    rayleigh_ritz(x, theta, coeffs);
    x = x * coeffs;
    Eigen::VectorXd lambda = theta.head(x.cols());
    Eigen::MatrixXd p(m, 0);

    const Eigen::VectorXd kdiag = stiffness.diagonal();
    const Eigen::VectorXd mdiag = mass.diagonal();

    double best = std::numeric_limits<double>::infinity();
    PencilEigenpairs out;
    for (int it = 0; it < options.max_iterations; ++it) {
        const Eigen::MatrixXd kx = stiffness * x;
        const Eigen::MatrixXd mx = mass * x;
        const Eigen::MatrixXd r = kx - mx * lambda.asDiagonal();
        double worst = 0.0;
        for (int i = 0; i < count; ++i) {
            const double denom = kx.col(i).norm() + std::abs(lambda[i]) * mx.col(i).norm();
            worst = std::max(worst, r.col(i).norm() / (denom > 0.0 ? denom : 1.0));
        }
        best = std::min(best, worst);
        if (worst <= options.tolerance) {
            out.values = lambda.head(count);
            out.vectors = x.leftCols(count);
            out.residuals = pencil_residuals(stiffness, mass, out.values, out.vectors);
            out.iterations = it;
            return out;
        }

        const double shift = std::max(std::abs(lambda[x.cols() - 1]), 1e-8);
        Eigen::MatrixXd w = (kdiag + shift * mdiag).cwiseInverse().asDiagonal() * r;
        project(w);

        Eigen::MatrixXd s(m, x.cols() + w.cols() + p.cols());
        s << x, w, p;
        project(s);
        s = svqb(mass, s);
        rayleigh_ritz(s, theta, coeffs);
        const Eigen::Index keep = std::min<Eigen::Index>(block, s.cols());
        Eigen::MatrixXd xn = s * coeffs.leftCols(keep);
        p = xn - x * (x.transpose() * (mass * xn));
        x = xn;
        lambda = theta.head(keep);
    }
    throw SolverError("LOBPCG did not converge in " + std::to_string(options.max_iterations) +
                          " iterations (best relative residual " + std::to_string(best) + ")",
                      best);
}

}  // namespace driftlab
