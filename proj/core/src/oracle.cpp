#include "driftlab/oracle.hpp"

#include "driftlab/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace driftlab {

namespace {

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

}  // namespace

GlobalForms kronecker_forms(const QuadraticForms& forms)
{
    if (forms.factors.empty()) throw UsageError("kronecker_forms: no factors");
    if (forms.dimension() > kOracleMaxDimension) {
        throw UsageError("dense oracle limited to dimension " + std::to_string(kOracleMaxDimension) + ", got " +
                         std::to_string(forms.dimension()));
    }
    const std::size_t n = forms.factors.size();
    GlobalForms g;
    g.mass = forms.factors[0].mass;
    for (std::size_t i = 1; i < n; ++i) g.mass = kron(g.mass, forms.factors[i].mass);
    g.stiffness = Eigen::MatrixXd::Zero(g.mass.rows(), g.mass.cols());
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::MatrixXd term = i == 0 ? forms.factors[0].stiffness : forms.factors[0].mass;
        for (std::size_t j = 1; j < n; ++j) term = kron(term, j == i ? forms.factors[j].stiffness : forms.factors[j].mass);
        g.stiffness += term;
    }
    const double c = forms.manifold.dimension() > 0 ? std::exp(-forms.manifold.weight_constant()) : 1.0;
    g.mass *= c;
    g.stiffness *= c;
    return g;
}

std::vector<double> dense_spectrum(const QuadraticForms& forms)
{
    const GlobalForms g = kronecker_forms(forms);
    const Eigen::MatrixXd m = 0.5 * (g.mass + g.mass.transpose());
    const Eigen::MatrixXd k = 0.5 * (g.stiffness + g.stiffness.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) throw OracleError("mass form is not positive definite");
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(k, m, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    if (eig.info() != Eigen::Success) throw OracleError("dense generalized eigensolve failed");
    std::vector<double> out(eig.eigenvalues().data(), eig.eigenvalues().data() + eig.eigenvalues().size());
    std::sort(out.begin(), out.end());
    return out;
}

double integrate_equality_ode(double F0, double s, double dt)
{
    if (!(dt > 0.0)) throw UsageError("integrate_equality_ode needs dt > 0");
    if (s < 0.0) throw UsageError("integrate_equality_ode needs s >= 0");
    constexpr double guard = 1e12;
    auto rhs = [](double F) { return (2.0 * F - 1.0) * F; };
    double F = F0;
    double t = 0.0;
    while (t < s) {
        double h = std::min(dt, s - t);
        const double rate = std::abs(2.0 * F - 1.0) + std::abs(2.0 * F);
        if (rate * h > 0.05) h = 0.05 / rate;
        if (s - t - h < 1e-15 * std::max(1.0, s)) h = s - t;
        const double k1 = rhs(F);
        const double k2 = rhs(F + 0.5 * h * k1);
        const double k3 = rhs(F + 0.5 * h * k2);
        const double k4 = rhs(F + h * k3);
        F += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
        if (!std::isfinite(F) || std::abs(F) > guard) {
            throw HorizonError("equality ODE solution left every bound before s=" + std::to_string(s) +
                                   " (|F| > 1e12 at t=" + std::to_string(t) + ")",
                               t);
        }
    }
    return F;
}

double quadrature_integral(const Field& samples, const DiscreteWeightedManifold& dm)
{
    if (samples.size() != dm.size()) throw UsageError("quadrature_integral: shape mismatch");
    Field w = Field::Ones(dm.size());
    for (int i = 0; i < dm.dimension(); ++i) {
        const auto& fac = dm.factor(i);
        const Eigen::VectorXd axis =
            (fac.quadrature_weights().array() * (-fac.weight.array()).exp() * fac.metric.array().sqrt()).matrix();
        w.array() *= dm.broadcast(axis, i).array();
    }
    return std::exp(-dm.weight_constant()) * samples.dot(w);
}

std::vector<double> finite_diff_time_derivative(const std::vector<double>& series, double dt)
{
    const std::size_t n = series.size();
    if (n < 3) throw UsageError("finite_diff_time_derivative needs at least 3 samples");
    if (!(dt > 0.0)) throw UsageError("finite_diff_time_derivative needs dt > 0");
    std::vector<double> d(n);
    d[0] = (-3.0 * series[0] + 4.0 * series[1] - series[2]) / (2.0 * dt);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (series[i + 1] - series[i - 1]) / (2.0 * dt);
    d[n - 1] = (3.0 * series[n - 1] - 4.0 * series[n - 2] + series[n - 3]) / (2.0 * dt);
    return d;
}

std::string fnv1a_hex(const void* data, std::size_t size)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string fnv1a_hex(const std::string& text)
{
    return fnv1a_hex(text.data(), text.size());
}

OracleReport make_report(std::string name, const std::vector<double>& inputs, std::vector<double> reference,
                         std::vector<double> target)
{
    if (reference.size() != target.size()) throw UsageError("oracle report: reference and target lengths differ");
    OracleReport r;
    r.name = std::move(name);
    r.inputs_digest = fnv1a_hex(inputs.data(), inputs.size() * sizeof(double));
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double a = std::abs(target[i] - reference[i]);
        r.abs_deviation = std::max(r.abs_deviation, a);
        r.rel_deviation = std::max(r.rel_deviation, reference[i] != 0.0 ? a / std::abs(reference[i]) : a);
    }
    r.reference = std::move(reference);
    r.target = std::move(target);
    return r;
}

}  // namespace driftlab
