#include "driftlab/acceptance.hpp"

#include "driftlab/comparison.hpp"
#include "driftlab/errors.hpp"
#include "driftlab/flow.hpp"
#include "driftlab/oracle.hpp"
#include "driftlab/splitting.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

namespace driftlab {

namespace {

std::string sci(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

std::string fixed(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10f", v);
    return buf;
}

struct Verdict {
    bool passed = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            passed = false;
            detail << "FAILED " << what << "; ";
        } else {
            detail << what << "; ";
        }
    }
};

ScenarioSpec family_run(AnalyticFamily family, double horizon, double output_interval, FlowBackend backend)
{
    ScenarioSpec s;
    s.name = family.describe();
    s.family = std::move(family);
    s.horizon = horizon;
    s.output_interval = output_interval;
    s.flow.backend = backend;
    return s;
}

double output_time(const FlowTrajectory& traj, std::size_t j)
{
    return traj.samples[traj.output_indices[j]].t;
}

void sharpness(Verdict& v)
{
    ScenarioSpec s = family_run(scaled_gaussian_family(2.0, 1, 0.0), std::log(2.0), 0.05, FlowBackend::Analytic);
    for (auto backend : {FlowBackend::Analytic, FlowBackend::Galerkin}) {
        s.flow.backend = backend;
        const FlowTrajectory traj = run_flow(s);
        const double lam0 = traj.spectra.front().eigenvalues[1];
        double worst = std::abs(lam0 - 0.25) / 0.25;
        for (std::size_t j = 0; j < traj.spectra.size(); ++j) {
            const double b = eigenvalue_bound(0.25, output_time(traj, j) - traj.t0());
            worst = std::max(worst, std::abs(traj.spectra[j].eigenvalues[1] - b) / b);
        }
        const double tol = backend == FlowBackend::Analytic ? 1e-8 : 1e-6;
        v.require(worst < tol, to_string(backend) + " max rel error " + sci(worst) + " < " + sci(tol) + " over " +
                                   std::to_string(traj.spectra.size()) + " outputs");
    }
}

void eternal(Verdict& v)
{
    const FlowTrajectory traj =
        run_flow(family_run(scaled_gaussian_family(2.0, 1, 0.0), 5.0, 0.1, FlowBackend::Galerkin));
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& s : traj.spectra) margin = std::min(margin, 0.5 - s.eigenvalues[1]);
    v.require(margin >= 1e-3, "min 1/2 - lambda_1 = " + sci(margin) + " >= 1e-3 over " +
                                  std::to_string(traj.spectra.size()) + " outputs to t = 5");
}

void bound_compliance(Verdict& v)
{
    struct Case {
        std::string label;
        AnalyticFamily family;
        double horizon;
    };
    const std::vector<Case> cases{
        {"gaussian(1/2)", scaled_gaussian_family(0.5, 1, 0.0), 0.6},
        {"gaussian(1)", scaled_gaussian_family(1.0, 1, 0.0), 0.5},
        {"gaussian(2)", scaled_gaussian_family(2.0, 1, 0.0), 0.5},
        {"circle(1/4)", round_circle_family(0.25, 0.0), 0.5},
        {"circle(1)", round_circle_family(1.0, 0.0), 0.5},
        {"circle(4)", round_circle_family(4.0, 0.0), 0.5},
        {"gaussian(2)xcircle(1)",
         product_family({scaled_gaussian_family(2.0, 1, 0.0), round_circle_family(1.0, 0.0)}), 0.5},
    };
    for (const auto& c : cases) {
        ScenarioSpec s = family_run(c.family, c.horizon, 0.05, FlowBackend::Galerkin);
        s.flow.eigen_count = 4;
        const FlowTrajectory traj = run_flow(s);
        const auto& first = traj.spectra.front().eigenvalues;
        double excess = -std::numeric_limits<double>::infinity();
        std::size_t compared = 0;
        for (std::size_t i = 1; i < first.size(); ++i) {
            const BoundCurve curve = bound_curve(first[i]);
            for (std::size_t j = 0; j < traj.spectra.size(); ++j) {
                const double ds = output_time(traj, j) - traj.t0();
                if (!curve.valid_at(ds)) continue;
                excess = std::max(excess, traj.spectra[j].eigenvalues[i] - curve(ds));
                ++compared;
            }
        }
        v.require(excess <= 1e-6, c.label + " max excess " + sci(excess) + " (" + std::to_string(compared) + " points)");
        if (c.label == "circle(1)") {
            const BoundCurve curve = bound_curve(1.0);
            double margin = std::numeric_limits<double>::infinity();
            for (std::size_t j = 1; j < traj.spectra.size(); ++j) {
                const double ds = output_time(traj, j) - traj.t0();
                margin = std::min(margin, curve(ds) - traj.spectra[j].eigenvalues[1]);
            }
            v.require(margin > 0.0, "circle(1) strict margin " + sci(margin) + " > 0 on (0, 0.5]");
        }
    }
}

void evolution_identities(Verdict& v)
{
    ScenarioSpec s = family_run(round_circle_family(1.0, 0.0), 0.5, 0.1, FlowBackend::Galerkin);
    s.flow.dt = 1e-3;
    s.scalars = {eigen_scalar({1, 3}), eigen_scalar({2, 4})};
    const FlowTrajectory traj = run_flow(s);
    const FunctionalReport rep = functional_residuals(traj);
    const double ij = std::max(rep.max_pair_residual, rep.max_energy_residual);
    v.require(ij < 1e-4, "J/I identities rel residual " + sci(ij) + " < 1e-4");
    v.require(rep.max_energy_increase < 1e-8, "E increase " + sci(rep.max_energy_increase) + " < 1e-8 |E|");
    v.require(rep.max_volume_drift < 1e-6, "volume drift " + sci(rep.max_volume_drift) + " < 1e-6");
    v.require(rep.max_mean < 1e-9, "mean " + sci(rep.max_mean) + " < 1e-9");
}

TrigPolynomial random_trig(std::mt19937_64& rng, int degree, double amplitude)
{
    std::uniform_real_distribution<double> uni(-amplitude, amplitude);
    std::vector<double> c(degree + 1), s(degree + 1, 0.0);
    for (int k = 0; k <= degree; ++k) {
        c[k] = uni(rng);
        if (k > 0) s[k] = uni(rng);
    }
    return TrigPolynomial::from_coefficients(c, s);
}

void bochner(Verdict& v)
{
    std::mt19937_64 rng(20261018);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        ContinuumState state;
        state.factors.push_back(
            CircleFactor{random_trig(rng, 2, 0.1).plus_constant(1.0), random_trig(rng, 3, 0.5)});
        const auto dm = discretize(state, Resolution{256, kMinHermiteOrder});
        const TrigPolynomial u = random_trig(rng, 5, 1.0);
        const Field samples = dm.sample([&](std::span<const double> x) { return u(x[0]); });
        worst = std::max(worst, bochner_terms(samples, dm).relative());
    }
    v.require(worst < 1e-8, "20 random weighted circles, worst rel residual " + sci(worst) + " < 1e-8");
}

void commutator(Verdict& v)
{
    {
        const FlowTrajectory traj =
            run_flow(family_run(scaled_gaussian_family(1.0, 1, 0.0), 0.2, 0.05, FlowBackend::Galerkin));
        const Field u = traj.samples.front().state.manifold.sample([](std::span<const double> x) { return x[0]; });
        double worst = 0.0;
        for (std::size_t idx : traj.output_indices) worst = std::max(worst, commutator_residual(u, traj, idx).absolute);
        v.require(worst < 1e-12, "static soliton residual " + sci(worst) + " < 1e-12");
    }
    {
        ScenarioSpec s = family_run(round_circle_family(1.0, 0.0), 0.5, 0.05, FlowBackend::Galerkin);
        s.flow.dt = 1e-3;
        const FlowTrajectory traj = run_flow(s);
        const Field u =
            traj.samples.front().state.manifold.sample([](std::span<const double> x) { return std::cos(x[0]); });
        double worst = 0.0;
        for (std::size_t idx : traj.output_indices) worst = std::max(worst, commutator_residual(u, traj, idx).relative);
        v.require(worst < 1e-5, "circle(1) cos residual " + sci(worst) + " < 1e-5 relative");
    }
}

void comparison_suite(Verdict& v)
{
    const std::vector<double> lambdas{0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 1.0, 2.0};
    const std::vector<double> times{0.0, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0};
    double ode_err = 0.0;
    int ode_points = 0;
    bool cases[3] = {false, false, false};
    for (double l : lambdas) {
        const BoundCurve curve = bound_curve(l);
        for (double s : times) {
            if (s >= 0.9 * curve.horizon) continue;
            const double b = eigenvalue_bound(l, s);
            ode_err = std::max(ode_err, std::abs(integrate_equality_ode(l, s, 1e-4) - b) / std::abs(b));
            ++ode_points;
            cases[static_cast<int>(curve.bound_case)] = true;
        }
    }
    v.require(ode_err <= 1e-10 && cases[0] && cases[1] && cases[2],
              "closed form vs RK4 rel " + sci(ode_err) + " <= 1e-10 at " + std::to_string(ode_points) +
                  " points, all three cases");

    const std::vector<double> steps{0.05, 0.1, 0.3, 0.7};
    double semi = 0.0;
    for (double l : lambdas) {
        const double h = blowup_horizon(l);
        for (double s1 : steps) {
            for (double s2 : steps) {
                if (s1 + s2 >= 0.8 * h) continue;
                const double whole = eigenvalue_bound(l, s1 + s2);
                semi = std::max(semi, std::abs(eigenvalue_bound(eigenvalue_bound(l, s1), s2) - whole) / whole);
            }
        }
    }
    v.require(semi <= 1e-12, "semigroup rel " + sci(semi) + " <= 1e-12");

    const double hz = std::abs(blowup_horizon(1.0) - std::log(2.0));
    v.require(hz <= 1e-12, "horizon(1) - log 2 = " + sci(hz));

    bool flat = true;
    for (double s : {0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0}) flat = flat && logistic_envelope(1.0, s) == 1.0;
    v.require(flat, "logistic envelope from 1 is identically 1");

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double excess = -std::numeric_limits<double>::infinity();
    const double dt = 1e-3;
    for (int trial = 0; trial < 100; ++trial) {
        const double h0 = uni(rng);
        double c[3], w[3], p[3];
        for (int j = 0; j < 3; ++j) {
            // The first trial has r = 0, where the envelope is attained.
            c[j] = trial == 0 ? 0.0 : 0.5 * uni(rng);
            w[j] = 0.5 + 4.5 * uni(rng);
            p[j] = 2.0 * std::numbers::pi * uni(rng);
        }
        auto rhs = [&](double t, double h) {
            double r = 0.0;
            for (int j = 0; j < 3; ++j) r += c[j] * (1.0 + std::sin(w[j] * t + p[j]));
            return h * (h - 1.0) - r;
        };
        double h = h0;
        for (int n = 0; n < 3000; ++n) {
            const double t = n * dt;
            const double k1 = rhs(t, h);
            const double k2 = rhs(t + 0.5 * dt, h + 0.5 * dt * k1);
            const double k3 = rhs(t + 0.5 * dt, h + 0.5 * dt * k2);
            const double k4 = rhs(t + dt, h + dt * k3);
            h += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            excess = std::max(excess, h - logistic_envelope(h0, (n + 1) * dt));
        }
    }
    v.require(excess <= 1e-9, "100 forced logistic solutions, max excess over envelope " + sci(excess));
}

std::vector<double> mixing_series(const FlowTrajectory& traj)
{
    std::vector<double> a;
    for (const auto& m : traj.mixing) a.push_back(m(0, 0));
    return a;
}

void gram_schmidt(Verdict& v)
{
    {
        ScenarioSpec s = family_run(scaled_gaussian_family(2.0, 1, 0.0), 0.1, 0.05, FlowBackend::Galerkin);
        s.scalars = {eigen_scalar({1})};
        const FlowTrajectory traj = run_flow(s);
        const double d0 = finite_diff_time_derivative(mixing_series(traj), traj.step).front();
        v.require(std::abs(d0 + 0.25) <= 1e-4, "gaussian(2) a11'(0) = " + fixed(d0));
    }
    {
        ScenarioSpec s = family_run(scaled_gaussian_family(1.0, 1, 0.0), 0.1, 0.05, FlowBackend::Galerkin);
        s.scalars = {eigen_scalar({1})};
        const FlowTrajectory traj = run_flow(s);
        double worst = 0.0;
        for (double d : finite_diff_time_derivative(mixing_series(traj), traj.step)) worst = std::max(worst, std::abs(d));
        v.require(worst <= 1e-10, "static soliton max |a11'| " + sci(worst));
    }
}

void splitting(Verdict& v)
{
    const FlowTrajectory traj = run_flow(family_run(
        product_family({scaled_gaussian_family(1.0, 1, 0.0), round_circle_family(0.25, 0.0)}), 0.5, 0.1,
        FlowBackend::Analytic));
    const SplittingOutcome out = detect_splitting(traj, traj.t0(), traj.t1());
    v.require(out.fired(), "product certificate fired");
    if (out.fired()) {
        const auto& c = *out.certificate;
        double hess = 0.0;
        for (double h : c.residuals.hessian_energy) hess = std::max(hess, h);
        v.require(c.valid, "certificate valid, k = " + std::to_string(c.k));
        v.require(c.eigenvalue_deviation <= 1e-8, "|lambda - 1/2| " + sci(c.eigenvalue_deviation));
        v.require(hess < 1e-10, "Hessian energy " + sci(hess));
        v.require(c.residuals.gradient_norm_deviation < 1e-8,
                  "gradient deviation " + sci(c.residuals.gradient_norm_deviation));
        v.require(c.residuals.decomposition < 1e-8, "decomposition " + sci(c.residuals.decomposition));
    }
    for (auto family : {scaled_gaussian_family(2.0, 1, 0.0), round_circle_family(4.0, 0.0)}) {
        const std::string label = family.describe();
        const FlowTrajectory t = run_flow(family_run(family, 0.5, 0.1, FlowBackend::Analytic));
        const SplittingOutcome o = detect_splitting(t, t.t0(), t.t1());
        v.require(!o.fired() && o.failure.has_value(), label + " gives a hypothesis-failure report");
    }
}

void spectral_correctness(Verdict& v)
{
    const std::vector<double> scales{0.25, 0.5, 1.0, 2.0, 4.0};
    double gauss = 0.0;
    for (double a : scales) {
        const auto dm = discretize(scaled_gaussian_family(a, 1, 0.0).evaluate(0.0), Resolution{64, 16});
        const SpectralResult r = lowest_eigenpairs(assemble_forms(dm), 8);
        for (std::size_t j = 1; j < r.eigenvalues.size(); ++j) {
            const double exact = static_cast<double>(j) / (2.0 * a);
            gauss = std::max(gauss, std::abs(r.eigenvalues[j] - exact) / exact);
        }
    }
    v.require(gauss <= 1e-12, "gaussian multiples of 1/(2a), rel " + sci(gauss) + " <= 1e-12");

    double analytic = 0.0, dense = 0.0;
    for (double a : scales) {
        const auto dm = discretize(round_circle_family(a, 0.0).evaluate(0.0), Resolution{64, 16});
        const QuadraticForms forms = assemble_forms(dm);
        const SpectralResult r = lowest_eigenpairs(forms, 8);
        const auto d = dense_spectrum(forms);
        for (std::size_t j = 1; j < r.eigenvalues.size(); ++j) {
            const double k = static_cast<double>((j + 1) / 2);
            const double exact = k * k / a;
            analytic = std::max(analytic, std::abs(r.eigenvalues[j] - exact) / exact);
            dense = std::max(dense, std::abs(r.eigenvalues[j] - d[j]) / exact);
        }
        dense = std::max(dense, std::abs(d[0]));
    }
    v.require(analytic <= 1e-10, "circle vs k^2/a rel " + sci(analytic) + " <= 1e-10");
    v.require(dense <= 1e-10, "circle vs dense spectrum rel " + sci(dense) + " <= 1e-10");
}

struct Entry {
    const char* name;
    void (*run)(Verdict&);
    double limit;
};

const Entry kEntries[kCriterionCount] = {
    {"sharp bound on the shrinking Gaussian", sharpness, 5.0},
    {"eternal flow stays below one half", eternal, 0.0},
    {"eigenvalue bound compliance", bound_compliance, 30.0},
    {"evolution identities", evolution_identities, 0.0},
    {"drift Bochner identity", bochner, 5.0},
    {"time-derivative commutator", commutator, 0.0},
    {"comparison ODE suite", comparison_suite, 0.0},
    {"Gram-Schmidt derivative", gram_schmidt, 0.0},
    {"splitting certificate", splitting, 0.0},
    {"spectral correctness", spectral_correctness, 0.0},
};

}  // namespace

CriterionResult run_criterion(int id)
{
    CriterionResult res;
    res.id = id;
    if (id < 1 || id > kCriterionCount) {
        res.name = "unknown";
        res.detail = "no criterion " + std::to_string(id);
        return res;
    }
    const Entry& e = kEntries[id - 1];
    res.name = e.name;
    res.time_limit = e.limit;
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
        e.run(v);
    } catch (const Error& err) {
        v.passed = false;
        v.detail << "error kind=" << err.kind() << ": " << err.what();
    } catch (const std::exception& err) {
        v.passed = false;
        v.detail << "error: " << err.what();
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    res.passed = v.passed;
    res.detail = v.detail.str();
    if (res.time_limit > 0.0) {
        const bool fast = res.seconds < res.time_limit;
        res.passed = res.passed && fast;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%sruntime %.2f s < %.0f s", fast ? "" : "FAILED ", res.seconds, res.time_limit);
        res.detail += buf;
    }
    while (!res.detail.empty() && (res.detail.back() == ' ' || res.detail.back() == ';')) res.detail.pop_back();
    return res;
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids)
{
    std::vector<int> todo = ids;
    if (todo.empty()) {
        for (int i = 1; i <= kCriterionCount; ++i) todo.push_back(i);
    }
    std::vector<CriterionResult> out;
    for (int id : todo) out.push_back(run_criterion(id));
    return out;
}

std::string format_criterion(const CriterionResult& r)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, " (%.2f s): ", r.seconds);
    return std::string(r.passed ? "PASS" : "FAIL") + " [" + std::to_string(r.id) + "] " + r.name + buf + r.detail;
}

}  // namespace driftlab
