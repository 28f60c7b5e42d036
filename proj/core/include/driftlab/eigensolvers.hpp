#pragma once

#include <Eigen/Dense>

namespace driftlab {

/// Eigenpairs of the symmetric-definite pencil K x = lambda M x restricted to
/// the M-orthogonal complement of a kernel vector (the constant function).
struct PencilEigenpairs {
    Eigen::VectorXd values;    // ascending
    Eigen::MatrixXd vectors;   // columns, M-orthonormal
    Eigen::VectorXd residuals; // |K x - lambda M x| / (|K x| + |lambda| |M x|)
    int iterations = 0;
};

Eigen::VectorXd pencil_residuals(const Eigen::MatrixXd& stiffness, const Eigen::MatrixXd& mass,
                                 const Eigen::VectorXd& values, const Eigen::MatrixXd& vectors);

/// Dense solve of the deflated pencil: Householder basis of {x : (M k)^T x = 0}
/// followed by a generalized self-adjoint eigensolve. Returns `count` pairs.
PencilEigenpairs dense_deflated_eigenpairs(const Eigen::MatrixXd& stiffness, const Eigen::MatrixXd& mass,
                                           const Eigen::VectorXd& kernel, int count);

struct LobpcgOptions {
    double tolerance = 1e-10;
    int max_iterations = 2000;
    int guard_vectors = 4;
};

/// Block LOBPCG for the lowest `count` eigenpairs of the deflated pencil, with
/// SVQB M-orthonormalization and a Jacobi preconditioner.
/// Throws SolverError carrying the best residual on non-convergence.
PencilEigenpairs lobpcg_deflated_eigenpairs(const Eigen::MatrixXd& stiffness, const Eigen::MatrixXd& mass,
                                            const Eigen::VectorXd& kernel, int count,
                                            const LobpcgOptions& options = {});

}  // namespace driftlab
