#pragma once

#include "driftlab/flow.hpp"

#include <optional>
#include <string>
#include <vector>

namespace driftlab {

struct SplittingTolerances {
    double eigenvalue = 1e-8;
    double hessian = 1e-10;
    double gradient = 1e-8;
    double decomposition = 1e-8;
    double factor_equation = 1e-8;

    /// Looser defaults for runs whose geometry is integrated numerically.
    static SplittingTolerances galerkin();
};

/// Residuals of a set of split directions on one state. All entries are >= 0.
struct CertificateResiduals {
    /// Integral of |Hess u_i|^2 e^{-f} per direction.
    std::vector<double> hessian_energy;
    /// sup | |grad u_i| - 1 | after normalization.
    double gradient_norm_deviation = 0.0;
    /// sup |<grad u_i, grad u_j>| over i != j.
    double gradient_cross = 0.0;
    /// Mean of |grad u_i|^2 over directions and nodes (1 for an exact split).
    double gradient_mean = 0.0;
    /// sup |<grad u_i, grad (f - sum u_j^2 / 4)>|: dependence of f_N on split coordinates.
    double decomposition = 0.0;
    /// sup over metric components of |g_t - (g - sum du_i^2 - 2 Hess fbar)|, relative to sup |g|.
    double metric_block = 0.0;
    /// sup |f_t - ((n - k)/2 - Delta fbar)|.
    double weight_equation = 0.0;

    bool within(const SplittingTolerances& tol) const;
};

struct SplittingCertificate {
    int k = 0;
    double t0 = 0.0;
    double t1 = 0.0;
    /// Hypothesis record.
    double lambda_k_t0 = 0.0;
    double lambda_1_t1 = 0.0;
    /// Eigenvalues of the split directions at t0, and the largest deviation
    /// from 1/2 over all sampled times.
    std::vector<double> eigenvalues;
    double eigenvalue_deviation = 0.0;
    /// Normalized directions (|grad u_i| ~ 1) on the t0 state.
    std::vector<Field> directions;
    /// f_N = f - sum u_i^2 / 4 on the t0 state.
    Field weight_remainder;
    /// Worst residuals over the sampled times in [t0, t1].
    CertificateResiduals residuals;
    std::size_t sampled_times = 0;
    SplittingTolerances tolerances;
    bool valid = false;
};

struct HypothesisFailure {
    std::vector<std::string> violated;
    double lambda_k_t0 = 0.0;
    double lambda_1_t1 = 0.0;
    std::string message;
};

struct SplittingOutcome {
    std::optional<SplittingCertificate> certificate;
    std::optional<HypothesisFailure> failure;

    bool fired() const { return certificate.has_value(); }
};

/// Checks lambda_k(t0) = 1/2 and lambda_1(t1) >= 1/2 within tol.eigenvalue and
/// builds a certificate from the 1/2 eigencluster at every output time in
/// [t0, t1]. Throws UsageError when spectra are missing at t0 or t1.
SplittingOutcome detect_splitting(const FlowTrajectory& traj, double t0, double t1,
                                  const SplittingTolerances& tol = {});

/// Scales each direction so the weighted mean of |grad u|^2 is 1.
std::vector<Field> normalize_directions(const std::vector<Field>& directions, const DiscreteWeightedManifold& dm);

/// Recomputes the residuals of already normalized directions on `state`.
CertificateResiduals certificate_residuals(const std::vector<Field>& directions, const FlowState& state);
CertificateResiduals certificate_residuals(const SplittingCertificate& cert, const FlowState& state);

}  // namespace driftlab
