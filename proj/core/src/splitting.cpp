#include "driftlab/splitting.hpp"

#include "driftlab/errors.hpp"
#include "driftlab/field_ops.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace driftlab {

namespace {

std::size_t output_at(const FlowTrajectory& traj, double t)
{
    for (std::size_t j = 0; j < traj.output_indices.size(); ++j) {
        const double tj = traj.samples[traj.output_indices[j]].t;
        if (std::abs(tj - t) <= 1e-9 * std::max(1.0, std::abs(t))) return j;
    }
    throw UsageError("no spectrum stored at t=" + std::to_string(t));
}

// Indices 1..k of eigenvalues within tol of 1/2, starting at lambda_1.
std::vector<int> half_cluster(const SpectralResult& s, double tol)
{
    std::vector<int> out;
    for (std::size_t i = 1; i < s.eigenvalues.size(); ++i) {
        if (std::abs(s.eigenvalues[i] - 0.5) <= tol) out.push_back(static_cast<int>(i));
        else if (s.eigenvalues[i] > 0.5) break;
    }
    return out;
}

void merge_worst(CertificateResiduals& acc, const CertificateResiduals& r)
{
    if (acc.hessian_energy.size() < r.hessian_energy.size()) acc.hessian_energy.resize(r.hessian_energy.size(), 0.0);
    for (std::size_t i = 0; i < r.hessian_energy.size(); ++i) {
        acc.hessian_energy[i] = std::max(acc.hessian_energy[i], r.hessian_energy[i]);
    }
    acc.gradient_norm_deviation = std::max(acc.gradient_norm_deviation, r.gradient_norm_deviation);
    acc.gradient_cross = std::max(acc.gradient_cross, r.gradient_cross);
    acc.gradient_mean = r.gradient_mean;
    acc.decomposition = std::max(acc.decomposition, r.decomposition);
    acc.metric_block = std::max(acc.metric_block, r.metric_block);
    acc.weight_equation = std::max(acc.weight_equation, r.weight_equation);
}

}  // namespace

SplittingTolerances SplittingTolerances::galerkin()
{
    SplittingTolerances t;
    t.eigenvalue = 1e-5;
    t.hessian = 1e-6;
    t.gradient = 1e-5;
    t.decomposition = 1e-5;
    t.factor_equation = 1e-5;
    return t;
}

bool CertificateResiduals::within(const SplittingTolerances& tol) const
{
    for (double h : hessian_energy) {
        if (!(h <= tol.hessian)) return false;
    }
    return gradient_norm_deviation <= tol.gradient && gradient_cross <= tol.gradient &&
           decomposition <= tol.decomposition && metric_block <= tol.factor_equation &&
           weight_equation <= tol.factor_equation;
}

std::vector<Field> normalize_directions(const std::vector<Field>& directions, const DiscreteWeightedManifold& dm)
{
    const double volume = dm.total_volume();
    std::vector<Field> out;
    for (const auto& u : directions) {
        const Pairings p = weighted_pairings(u, u, dm);
        const double d = p.D;
        if (!(d > 1e-20 * p.J)) throw DegeneracyError("split direction has zero Dirichlet energy");
        out.push_back(u * std::sqrt(volume / d));
    }
    return out;
}

CertificateResiduals certificate_residuals(const std::vector<Field>& directions, const FlowState& state)
{
    const auto& dm = state.manifold;
    CertificateResiduals r;
    const std::size_t k = directions.size();
    if (k == 0) return r;
    for (const auto& u : directions) require_compatible(dm, u, "certificate_residuals");

    std::vector<VectorField> grads;
    double mean = 0.0;
    for (const auto& u : directions) {
        r.hessian_energy.push_back(std::max(0.0, hessian_norm_sq(u, dm)));
        const Field g2 = gradient_inner(dm, u, u);
        r.gradient_norm_deviation =
            std::max(r.gradient_norm_deviation, (g2.array().max(0.0).sqrt() - 1.0).abs().maxCoeff());
        mean += g2.mean();
        grads.push_back(gradient(dm, u));
    }
    r.gradient_mean = mean / static_cast<double>(k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            r.gradient_cross =
                std::max(r.gradient_cross, gradient_inner(dm, directions[i], directions[j]).cwiseAbs().maxCoeff());
        }
    }

    Field fbar = dm.weight();
    for (const auto& u : directions) fbar -= 0.25 * u.cwiseAbs2();
    for (const auto& u : directions) {
        r.decomposition = std::max(r.decomposition, gradient_inner(dm, u, fbar).cwiseAbs().maxCoeff());
    }

    // g_t = g_N - 2 Hess fbar (flat factors), with g_N = g - sum du_i^2.
    const FlowVelocity vel = flow_velocity(state);
    const int n = dm.dimension();
    std::vector<Field> du;
    double gmax = 0.0;
    for (int i = 0; i < n; ++i) gmax = std::max(gmax, dm.factor(i).metric.cwiseAbs().maxCoeff());
    for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) {
            Field lhs = a == b ? dm.broadcast(vel.metric_rate[a], a) : Field::Zero(dm.size());
            Field rhs = a == b ? dm.broadcast(dm.factor(a).metric, a) : Field::Zero(dm.size());
            for (const auto& u : directions) rhs -= partial(dm, u, a).cwiseProduct(partial(dm, u, b));
            rhs -= 2.0 * hessian_component(dm, fbar, a, b);
            r.metric_block = std::max(r.metric_block, (lhs - rhs).cwiseAbs().maxCoeff() / std::max(gmax, 1e-300));
        }
    }

    Field ft = Field::Zero(dm.size());
    for (int i = 0; i < n; ++i) ft += dm.broadcast(vel.weight_rate[i], i);
    const Field target = Field::Constant(dm.size(), 0.5 * (n - static_cast<double>(k))) - laplacian(dm, fbar);
    r.weight_equation = (ft - target).cwiseAbs().maxCoeff();
    return r;
}

CertificateResiduals certificate_residuals(const SplittingCertificate& cert, const FlowState& state)
{
    return certificate_residuals(cert.directions, state);
}

SplittingOutcome detect_splitting(const FlowTrajectory& traj, double t0, double t1, const SplittingTolerances& tol)
{
    if (!(t0 < t1)) throw UsageError("detect_splitting needs t0 < t1");
    if (traj.spectra.size() != traj.output_indices.size() || traj.spectra.empty()) {
        throw UsageError("detect_splitting needs spectra at the output times");
    }
    const std::size_t j0 = output_at(traj, t0);
    const std::size_t j1 = output_at(traj, t1);
    const SpectralResult& s0 = traj.spectra[j0];
    const SpectralResult& s1 = traj.spectra[j1];

    const std::vector<int> cluster = half_cluster(s0, tol.eigenvalue);
    const int k = static_cast<int>(cluster.size());
    const double lam_k0 = k > 0 ? s0.eigenvalues[cluster.back()] : (s0.eigenvalues.size() > 1 ? s0.eigenvalues[1] : 0.0);
    const double lam_11 = s1.eigenvalues.size() > 1 ? s1.eigenvalues[1] : 0.0;

    SplittingOutcome out;
    std::vector<std::string> violated;
    if (k == 0) violated.push_back("lambda_k(t0) = 1/2");
    if (lam_11 < 0.5 - tol.eigenvalue) violated.push_back("lambda_1(t1) >= 1/2");
    if (!violated.empty()) {
        HypothesisFailure f;
        f.violated = violated;
        f.lambda_k_t0 = lam_k0;
        f.lambda_1_t1 = lam_11;
        std::ostringstream os;
        os.precision(12);
        os << "hypothesis not met:";
        for (const auto& v : violated) os << " [" << v << "]";
        os << " (lambda at t0 = " << lam_k0 << ", lambda_1(t1) = " << lam_11 << ")";
        f.message = os.str();
        out.failure = std::move(f);
        return out;
    }

    SplittingCertificate cert;
    cert.k = k;
    cert.t0 = traj.samples[traj.output_indices[j0]].t;
    cert.t1 = traj.samples[traj.output_indices[j1]].t;
    cert.lambda_k_t0 = lam_k0;
    cert.lambda_1_t1 = lam_11;
    cert.tolerances = tol;
    bool cluster_ok = true;
    for (std::size_t j = j0; j <= j1; ++j) {
        const SpectralResult& s = traj.spectra[j];
        const FlowState& st = traj.samples[traj.output_indices[j]].state;
        std::vector<Field> dirs;
        for (int i = 1; i <= k; ++i) {
            if (static_cast<std::size_t>(i) >= s.eigenvalues.size()) {
                cluster_ok = false;
                break;
            }
            cert.eigenvalue_deviation = std::max(cert.eigenvalue_deviation, std::abs(s.eigenvalues[i] - 0.5));
            dirs.push_back(s.eigenfunctions[i]);
        }
        if (!cluster_ok) break;
        dirs = normalize_directions(dirs, st.manifold);
        merge_worst(cert.residuals, certificate_residuals(dirs, st));
        if (j == j0) {
            for (int i = 1; i <= k; ++i) cert.eigenvalues.push_back(s.eigenvalues[i]);
            cert.directions = dirs;
            cert.weight_remainder = st.manifold.weight();
            for (const auto& u : dirs) cert.weight_remainder -= 0.25 * u.cwiseAbs2();
        }
        ++cert.sampled_times;
    }
    cert.valid = cluster_ok && cert.eigenvalue_deviation <= tol.eigenvalue && cert.residuals.within(tol);
    out.certificate = std::move(cert);
    return out;
}

}  // namespace driftlab
