#include "driftlab/spectral.hpp"

#include "driftlab/eigensolvers.hpp"
#include "driftlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace driftlab {

namespace {

struct FactorSpectrum {
    std::vector<double> values;
    Eigen::MatrixXd vectors;  // modal, M-orthonormal, column 0 is the constant
    std::vector<double> residual_norms;  // |K x - lambda M x|
    std::vector<double> mass_norms;      // |M x|
};

FactorSpectrum factor_spectrum(const FactorForms& ff, int count, double tol)
{
    const Eigen::Index m = ff.mass.rows();
    const int wanted = static_cast<int>(std::min<Eigen::Index>(count, m - 1));
    PencilEigenpairs pairs;
    if (m < kDenseThreshold) {
        pairs = dense_deflated_eigenpairs(ff.stiffness, ff.mass, ff.kernel, wanted);
    } else {
        LobpcgOptions opts;
        opts.tolerance = tol;
        pairs = lobpcg_deflated_eigenpairs(ff.stiffness, ff.mass, ff.kernel, wanted, opts);
    }

    FactorSpectrum out;
    out.vectors.resize(m, wanted + 1);
    out.vectors.col(0) = ff.kernel / std::sqrt(ff.kernel.dot(ff.mass * ff.kernel));
    out.values.push_back(0.0);
    for (int i = 0; i < wanted; ++i) {
        out.values.push_back(pairs.values[i]);
        out.vectors.col(i + 1) = pairs.vectors.col(i);
        fix_sign(out.vectors.col(i + 1));
    }
    for (int i = 0; i <= wanted; ++i) {
        const Eigen::VectorXd mx = ff.mass * out.vectors.col(i);
        out.residual_norms.push_back((ff.stiffness * out.vectors.col(i) - out.values[i] * mx).norm());
        out.mass_norms.push_back(mx.norm());
    }
    return out;
}

struct Combo {
    double value = 0.0;
    std::vector<int> index;
};

}  // namespace

void fix_sign(Eigen::Ref<Eigen::VectorXd> v)
{
    if (v.size() == 0) return;
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0.0) v = -v;
}

FactorForms assemble_factor_forms(const DiscreteFactor& factor, int modes)
{
    const auto& b = *factor.basis;
    for (Eigen::Index j = 0; j < factor.metric.size(); ++j) {
        if (!(factor.metric[j] > 0.0)) {
            throw AssemblyError("metric sample " + std::to_string(factor.metric[j]) + " at node " +
                                std::to_string(j) + " is not positive");
        }
    }
    const Eigen::Index cols = modes < 0 ? b.mode_count() : std::min<Eigen::Index>(modes, b.mode_count());
    const Eigen::MatrixXd e = b.eval.leftCols(cols);
    const Eigen::MatrixXd e1 = b.eval_d1.leftCols(cols);
    const Eigen::VectorXd mu = factor.measure();
    const Eigen::VectorXd mu_g = mu.cwiseQuotient(factor.metric);

    FactorForms out;
    out.mass = e.transpose() * mu.asDiagonal() * e;
    out.stiffness = e1.transpose() * mu_g.asDiagonal() * e1;
    out.mass = 0.5 * (out.mass + out.mass.transpose());
    out.stiffness = 0.5 * (out.stiffness + out.stiffness.transpose());
    out.kernel = Eigen::VectorXd::Zero(cols);
    out.kernel[0] = 1.0 / b.eval(0, 0);
    return out;
}

double QuadraticForms::J(const Field& u, const Field& v) const
{
    return weighted_pairings(u, v, manifold).J;
}

double QuadraticForms::D(const Field& u, const Field& v) const
{
    return weighted_pairings(u, v, manifold).D;
}

Eigen::Index QuadraticForms::dimension() const
{
    Eigen::Index n = 1;
    for (const auto& f : factors) n *= f.mass.rows();
    return n;
}

QuadraticForms assemble_forms(const DiscreteWeightedManifold& dm)
{
    QuadraticForms out;
    out.manifold = dm;
    for (int i = 0; i < dm.dimension(); ++i) out.factors.push_back(assemble_factor_forms(dm.factor(i)));
    return out;
}

SpectralResult lowest_eigenpairs(const QuadraticForms& forms, int k, double tol)
{
    if (k < 1) throw UsageError("lowest_eigenpairs needs k >= 1");
    if (static_cast<Eigen::Index>(k) >= forms.dimension()) {
        throw UsageError("requested " + std::to_string(k + 1) + " eigenpairs but the discrete dimension is " +
                         std::to_string(forms.dimension()));
    }
    const auto& dm = forms.manifold;
    const std::size_t want = static_cast<std::size_t>(k) + 1;

    std::vector<FactorSpectrum> spectra;
    for (const auto& ff : forms.factors) spectra.push_back(factor_spectrum(ff, k, tol));

    // Lowest k + 1 sums over factor index tuples; ties resolved by tuple order.
    std::vector<Combo> acc{Combo{0.0, {}}};
    for (const auto& s : spectra) {
        std::vector<Combo> next;
        for (const auto& c : acc) {
            for (std::size_t j = 0; j < s.values.size(); ++j) {
                Combo n = c;
                n.value += s.values[j];
                n.index.push_back(static_cast<int>(j));
                next.push_back(std::move(n));
            }
        }
        std::stable_sort(next.begin(), next.end(), [](const Combo& a, const Combo& b) {
            if (a.value != b.value) return a.value < b.value;
            return a.index < b.index;
        });
        if (next.size() > want) next.resize(want);
        acc = std::move(next);
    }

    SpectralResult out;
    out.t = dm.time();
    const double norm = std::exp(0.5 * dm.weight_constant());
    for (const auto& c : acc) {
        Field u = Field::Constant(dm.size(), norm);
        double rnum = 0.0;
        for (int i = 0; i < dm.dimension(); ++i) {
            const auto& b = *dm.factor(i).basis;
            const auto& s = spectra[i];
            const int j = c.index[i];
            const Eigen::VectorXd nodal = b.eval.leftCols(s.vectors.rows()) * s.vectors.col(j);
            u.array() *= dm.broadcast(nodal, i).array();
            rnum += s.residual_norms[j] / s.mass_norms[j];
        }
        out.eigenvalues.push_back(c.value);
        out.eigenfunctions.push_back(std::move(u));
        out.residuals.push_back(c.value > 0.0 ? rnum / c.value : rnum);
    }
    // lambda_0 is the constant function by construction.
    out.eigenvalues[0] = 0.0;
    return out;
}

Pairings weighted_pairings(const Field& u, const Field& v, const DiscreteWeightedManifold& dm)
{
    require_compatible(dm, u, "weighted_pairings");
    require_compatible(dm, v, "weighted_pairings");
    Pairings p;
    p.J = integrate(dm, u.cwiseProduct(v));
    p.D = integrate(dm, gradient_inner(dm, u, v));
    return p;
}

EnergyProfile energy_profile(const Field& u, const DiscreteWeightedManifold& dm)
{
    const Pairings p = weighted_pairings(u, u, dm);
    if (!(p.J > 0.0)) throw UndefinedQuotientError("Rayleigh quotient of a zero function");
    return {p.J, p.D, p.D / p.J};
}

double hessian_norm_sq(const Field& u, const DiscreteWeightedManifold& dm)
{
    return integrate(dm, hessian_norm_sq_pointwise(dm, u));
}

Field defect_quadratic(const DiscreteWeightedManifold& dm, const Field& u)
{
    require_compatible(dm, u, "defect_quadratic");
    Field out = Field::Zero(dm.size());
    for (int i = 0; i < dm.dimension(); ++i) {
        const auto& fac = dm.factor(i);
        const Eigen::VectorXd hess_f = fac.weight_d2 - fac.christoffel().cwiseProduct(fac.weight_d1);
        const Eigen::VectorXd phi = 0.5 * fac.metric - hess_f;
        // phi_ii (grad u)^i (grad u)^i with (grad u)^i = d_i u / g_i.
        const Field coeff = dm.broadcast(phi.cwiseQuotient(fac.metric.cwiseAbs2()), i);
        out.array() += coeff.array() * partial(dm, u, i).array().square();
    }
    return out;
}

double BochnerTerms::relative() const
{
    const double scale = std::max(std::abs(defect), std::abs(identity));
    return scale > 0.0 ? residual / scale : residual;
}

BochnerTerms bochner_terms(const Field& u, const DiscreteWeightedManifold& dm)
{
    BochnerTerms t;
    t.defect = integrate(dm, defect_quadratic(dm, u));
    const Field lu = drift_laplacian(dm, u);
    const Field integrand =
        hessian_norm_sq_pointwise(dm, u) + 0.5 * gradient_inner(dm, u, u) - lu.cwiseAbs2();
    t.identity = integrate(dm, integrand);
    t.residual = std::abs(t.defect - t.identity);
    return t;
}

double bochner_residual(const Field& u, const DiscreteWeightedManifold& dm)
{
    return bochner_terms(u, dm).residual;
}

Field drift_divergence(const VectorField& v, const DiscreteWeightedManifold& dm)
{
    if (static_cast<int>(v.size()) != dm.dimension()) {
        throw UsageError("drift_divergence: vector field has the wrong number of components");
    }
    Field out = Field::Zero(dm.size());
    for (int i = 0; i < dm.dimension(); ++i) {
        require_compatible(dm, v[i], "drift_divergence");
        const auto& fac = dm.factor(i);
        const Field c = dm.broadcast(fac.christoffel() - fac.weight_d1, i);
        out += partial(dm, v[i], i) + c.cwiseProduct(v[i]);
    }
    return out;
}

}  // namespace driftlab
