#include "driftlab/experiment.hpp"

#include "driftlab/comparison.hpp"
#include "driftlab/field_ops.hpp"
#include "driftlab/oracle.hpp"
#include "driftlab/serialization.hpp"

#include <json.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#ifndef DRIFTLAB_VERSION
#define DRIFTLAB_VERSION "unknown"
#endif

namespace driftlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json number(double v)
{
    if (std::isfinite(v)) return v;
    return format_number(v);
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io_error", "cannot write " + path.string());
    out << text;
    if (!out) throw Error("io_error", "write failed for " + path.string());
}

CheckResult check(std::string name, double value, double tolerance, std::string detail = {})
{
    CheckResult c;
    c.name = std::move(name);
    c.value = value;
    c.tolerance = tolerance;
    c.passed = value <= tolerance;
    c.detail = std::move(detail);
    return c;
}

std::vector<double> lambda_series(const FlowTrajectory& traj, std::size_t i)
{
    std::vector<double> out;
    for (const auto& s : traj.spectra) out.push_back(s.eigenvalues.at(i));
    return out;
}

std::vector<double> output_times(const FlowTrajectory& traj)
{
    std::vector<double> out;
    for (std::size_t idx : traj.output_indices) out.push_back(traj.samples[idx].t);
    return out;
}

void bound_checks(const FlowTrajectory& traj, const VerificationTolerances& tol, std::vector<CheckResult>& checks)
{
    const auto times = output_times(traj);
    const auto& first = traj.spectra.front().eigenvalues;
    double excess = -std::numeric_limits<double>::infinity();
    double forward = 0.0;
    bool forward_run = false;
    for (std::size_t i = 1; i < first.size(); ++i) {
        if (!(first[i] > 0.0)) continue;
        const BoundCurve curve = bound_curve(first[i]);
        const auto lam = lambda_series(traj, i);
        for (std::size_t j = 0; j < times.size(); ++j) {
            const double s = times[j] - times.front();
            if (curve.valid_at(s)) excess = std::max(excess, lam[j] - curve(s));
        }
        if (times.size() >= 3) {
            const auto v = forward_diff_check(
                times, lam, [](double, double h) { return (2.0 * h - 1.0) * h; }, tol.forward_slack);
            forward = std::max(forward, v.observed_slack);
            forward_run = true;
        }
    }
    if (std::isfinite(excess)) {
        checks.push_back(check("eigenvalue_bound", std::max(excess, 0.0), tol.bound,
                               "max lambda_i(t) - bound(lambda_i(t0), t - t0) = " + format_number(excess)));
    }
    if (forward_run) {
        checks.push_back(check("forward_difference", forward, tol.forward_slack,
                               "largest forward quotient excess over (2 lambda - 1) lambda"));
    }
}

void functional_checks(const FunctionalReport& rep, const VerificationTolerances& tol,
                       std::vector<CheckResult>& checks)
{
    checks.push_back(check("evolution_identities", std::max(rep.max_pair_residual, rep.max_energy_residual),
                           tol.identity, "J' = J - 2D and I' = I - 2E, relative"));
    checks.push_back(check("energy_monotone", std::max(rep.max_energy_increase, 0.0), tol.energy_monotone,
                           "largest relative increase of E"));
    checks.push_back(check("volume_drift", rep.max_volume_drift, tol.volume, "relative weighted volume drift"));
    checks.push_back(check("mean_zero", rep.max_mean, tol.mean, "largest |integral u e^{-f}| of mean-zero scalars"));
}

json checks_json(const std::vector<CheckResult>& checks)
{
    json a = json::array();
    for (const auto& c : checks) {
        a.push_back({{"name", c.name},
                     {"passed", c.passed},
                     {"value", number(c.value)},
                     {"tolerance", number(c.tolerance)},
                     {"detail", c.detail}});
    }
    return a;
}

json tolerance_json(const ScenarioConfig& cfg)
{
    const auto& t = cfg.tolerances;
    const auto& s = cfg.splitting_tolerances;
    return {{"verification",
             {{"bound", t.bound},
              {"identity", t.identity},
              {"energy_monotone", t.energy_monotone},
              {"volume", t.volume},
              {"mean", t.mean},
              {"bochner", t.bochner},
              {"commutator", t.commutator},
              {"forward_slack", t.forward_slack}}},
            {"splitting",
             {{"eigenvalue", s.eigenvalue},
              {"hessian", s.hessian},
              {"gradient", s.gradient},
              {"decomposition", s.decomposition},
              {"factor_equation", s.factor_equation}}},
            {"solver", cfg.spec.flow.solver_tolerance},
            {"step_error", cfg.spec.flow.error_tolerance}};
}

json flow_json(const ScenarioConfig& cfg, const FlowTrajectory& traj)
{
    const auto& f = cfg.spec.flow;
    return {{"backend", to_string(f.backend)},
            {"family", cfg.spec.family ? json(cfg.spec.family->describe()) : json(nullptr)},
            {"t0", traj.t0()},
            {"t1", traj.t1()},
            {"step", traj.step},
            {"outputs", traj.output_indices.size()},
            {"max_dt", f.max_dt},
            {"mode_cutoff", f.mode_cutoff},
            {"circle_nodes", f.resolution.circle_nodes},
            {"flow_grid_nodes", flow_grid_nodes(f)},
            {"hermite_order", f.resolution.hermite_order},
            {"eigen_count", f.eigen_count},
            {"stability_threshold", f.stability_threshold},
            {"rejected_steps", traj.rejected_steps}};
}

json report_json(const OracleReport& r)
{
    return json::parse(oracle_report_json(r));
}

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
            out += c;
        } else if (c == '\n') {
            out += "\\n";
        } else {
            out += c;
        }
    }
    return out;
}

}  // namespace

int exit_code_for(const Error& error)
{
    const std::string& k = error.kind();
    if (k == "config_error" || k == "domain_error" || k == "usage_error" || k == "out_of_regime") return kExitConfig;
    if (k == "stability_error" || k == "flow_breakdown" || k == "extinction_error" || k == "horizon_error" ||
        k == "assembly_error") {
        return kExitStability;
    }
    if (k == "solver_error" || k == "oracle_error") return kExitSolver;
    return kExitOther;
}

std::string error_line(const std::string& kind, const std::string& message)
{
    return "error: kind=" + kind + " message=\"" + escape(message) + "\"";
}

std::string default_output_root()
{
    const char* env = std::getenv("DRIFTLAB_OUT_ROOT");
    return env && *env ? std::string(env) : std::string("runs");
}

RunOutcome execute(const ScenarioConfig& config, const ExecuteOptions& options)
{
    const auto start = std::chrono::steady_clock::now();
    RunOutcome out;
    out.name = config.name;
    auto fail = [&](const std::string& kind, const std::string& message, int code) {
        out.exit_code = code;
        out.error_kind = kind;
        out.error_message = message;
        out.verified = false;
        return out;
    };

    try {
        const FlowTrajectory traj = run_flow(config.spec);
        const auto& tol = config.tolerances;
        const auto& first = traj.spectra.front();

        std::vector<OracleReport> reports;
        const std::vector<double> inputs{traj.t0(), traj.t1(), static_cast<double>(first.eigenvalues.size())};

        if (config.spec.family) {
            std::vector<double> ref, got;
            for (std::size_t j = 0; j < traj.spectra.size(); ++j) {
                const auto& ev = traj.spectra[j].eigenvalues;
                const auto a = config.spec.family->analytic_spectrum(traj.spectra[j].t, static_cast<int>(ev.size()));
                ref.insert(ref.end(), a.begin(), a.end());
                got.insert(got.end(), ev.begin(), ev.end());
            }
            reports.push_back(make_report("analytic_spectrum", inputs, ref, got));
            const double limit = config.spec.flow.backend == FlowBackend::Analytic ? 1e-8 : 1e-6;
            out.checks.push_back(check("analytic_spectrum", reports.back().rel_deviation, limit,
                                       "closed-form spectrum at every output time"));
        }

        const QuadraticForms forms0 = assemble_forms(traj.samples.front().state.manifold);
        if (forms0.dimension() <= kOracleMaxDimension) {
            auto dense = dense_spectrum(forms0);
            dense.resize(first.eigenvalues.size());
            reports.push_back(make_report("dense_spectrum", inputs, dense, first.eigenvalues));
            out.checks.push_back(check("dense_spectrum", reports.back().abs_deviation /
                                                             std::max(1.0, first.eigenvalues.back()),
                                       1e-8, "Kronecker dense solve at t0"));
        }

        if (first.eigenvalues.size() > 1 && first.eigenvalues[1] > 0.0 && traj.t1() > traj.t0()) {
            const BoundCurve curve = bound_curve(first.eigenvalues[1]);
            const double s = std::min(traj.t1() - traj.t0(), 0.9 * curve.horizon);
            const double ode = integrate_equality_ode(curve.lambda0, s, 1e-4);
            reports.push_back(make_report("equality_ode", {curve.lambda0, s}, {curve(s)}, {ode}));
        }

        if (config.verify.bounds) bound_checks(traj, tol, out.checks);

        FunctionalReport functionals;
        bool have_functionals = false;
        if (config.verify.functionals && !config.spec.scalars.empty() && traj.samples.size() >= 3) {
            functionals = functional_residuals(traj);
            have_functionals = true;
            functional_checks(functionals, tol, out.checks);
        }

        std::vector<double> commutator;
        if (config.verify.commutator && traj.samples.size() >= 3 && first.eigenfunctions.size() > 1) {
            const Field u = traj.samples.front().scalars.empty() ? first.eigenfunctions[1]
                                                                   : traj.samples.front().scalars.front();
            double worst = 0.0;
            for (std::size_t idx : traj.output_indices) {
                const auto r = commutator_residual(u, traj, idx);
                const auto& dm = traj.samples[idx].state.manifold;
                const double lu = std::sqrt(integrate(dm, drift_laplacian(dm, u).cwiseAbs2()));
                const double denom = r.relative > 0.0 ? r.absolute / r.relative : 0.0;
                const double scale = std::max(denom, lu);
                const double v = scale > 0.0 ? r.absolute / scale : r.absolute;
                commutator.push_back(v);
                worst = std::max(worst, v);
            }
            out.checks.push_back(check("commutator", worst, tol.commutator,
                                       "commutator residual relative to max(|d/dt L u|, 2 |div_f phi(grad u)|, |L u|)"));
        }

        if (config.verify.bochner && first.eigenfunctions.size() > 1) {
            const auto& dm = traj.samples.front().state.manifold;
            std::mt19937_64 rng(config.seed);
            std::normal_distribution<double> normal;
            Field mix = Field::Zero(dm.size());
            auto residual = [&](const Field& u) {
                const BochnerTerms b = bochner_terms(u, dm);
                const double scale =
                    std::max({std::abs(b.defect), std::abs(b.identity), weighted_pairings(u, u, dm).D});
                return scale > 0.0 ? b.residual / scale : b.residual;
            };
            double worst = 0.0;
            for (std::size_t i = 1; i < first.eigenfunctions.size(); ++i) {
                worst = std::max(worst, residual(first.eigenfunctions[i]));
                mix += normal(rng) * first.eigenfunctions[i];
            }
            worst = std::max(worst, residual(mix));
            out.checks.push_back(check("bochner", worst, tol.bochner,
                                       "eigenfunctions at t0 and a seeded combination, relative to the largest term"));
        }

        std::optional<SplittingOutcome> splitting;
        if (config.verify.splitting) {
            const double t0 = config.splitting_t0.value_or(traj.t0());
            const double t1 = config.splitting_t1.value_or(traj.t1());
            splitting = detect_splitting(traj, t0, t1, config.splitting_tolerances);
            CheckResult c;
            c.name = "splitting";
            c.passed = !splitting->fired() || splitting->certificate->valid;
            c.value = splitting->fired() ? 1.0 : 0.0;
            c.detail = splitting->fired() ? (splitting->certificate->valid ? "certificate valid" : "certificate invalid")
                                          : "hypothesis not met: " + splitting->failure->message;
            out.checks.push_back(c);
        }

        for (const auto& c : out.checks) out.verified = out.verified && c.passed;

        fs::path dir = options.out_dir;
        if (dir.empty()) dir = config.output_dir;
        if (dir.empty()) {
            dir = fs::path(options.out_root.empty() ? default_output_root() : options.out_root) / config.name;
        }
        fs::create_directories(dir);
        out.directory = dir.string();

        write_file(dir / "trajectory.csv",
                   to_csv(trajectory_table(traj, have_functionals ? &functionals : nullptr, commutator)));
        out.files.push_back("trajectory.csv");
        write_file(dir / "bounds.csv", to_csv(bounds_table(traj)));
        out.files.push_back("bounds.csv");
        write_file(dir / "spectra.json", spectra_json(traj));
        out.files.push_back("spectra.json");
        if (splitting) {
            write_file(dir / "certificate.json", certificate_json(*splitting));
            out.files.push_back("certificate.json");
        }
        out.files.push_back("manifest.json");

        if (!out.verified && options.strict) out.exit_code = kExitVerification;

        json reports_json = json::array();
        for (const auto& r : reports) reports_json.push_back(report_json(r));
        json manifest = {
            {"name", config.name},
            {"config_hash", config.hash()},
            {"config", config.entries},
            {"versions",
             {{"driftlab", DRIFTLAB_VERSION},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
              {"compiler", __VERSION__}}},
            {"seed", config.seed},
            {"flow", flow_json(config, traj)},
            {"tolerances", tolerance_json(config)},
            {"oracle_reports", reports_json},
            {"checks", checks_json(out.checks)},
            {"verified", out.verified},
            {"exit_code", out.exit_code},
            {"files", out.files},
            {"runtime_seconds",
             std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()},
        };
        write_file(dir / "manifest.json", manifest.dump(2) + "\n");
        return out;
    } catch (const Error& e) {
        return fail(e.kind(), e.what(), exit_code_for(e));
    } catch (const std::exception& e) {
        return fail("internal_error", e.what(), kExitOther);
    }
}

std::vector<RunOutcome> run_sweep(const std::vector<ScenarioConfig>& configs, const ExecuteOptions& options,
                                  int jobs)
{
    if (jobs < 1) throw ConfigurationError("--jobs must be at least 1");
    fs::path root = options.out_dir.empty()
                        ? fs::path(options.out_root.empty() ? default_output_root() : options.out_root)
                        : fs::path(options.out_dir);
    std::vector<RunOutcome> outcomes(configs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            ExecuteOptions o = options;
            o.out_dir = (root / configs[i].name).string();
            outcomes[i] = execute(configs[i], o);
        }
    };
    const int n = std::min<int>(jobs, static_cast<int>(configs.size()));
    std::vector<std::thread> pool;
    for (int i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    fs::create_directories(root);
    std::string csv = "name,exit_code,verified,config_hash,error_kind\n";
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto& o = outcomes[i];
        csv += o.name + ',' + std::to_string(o.exit_code) + ',' + (o.verified ? "1" : "0") + ',' +
               configs[i].hash() + ',' + o.error_kind + '\n';
    }
    write_file(root / "sweep.csv", csv);

    json runs = json::array();
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto& o = outcomes[i];
        runs.push_back({{"name", o.name},
                        {"directory", configs[i].name},
                        {"config_hash", configs[i].hash()},
                        {"exit_code", o.exit_code},
                        {"verified", o.verified},
                        {"error_kind", o.error_kind}});
    }
    const json manifest = {{"runs", runs}, {"files", {"sweep.csv", "sweep_manifest.json"}}};
    write_file(root / "sweep_manifest.json", manifest.dump(2) + "\n");
    return outcomes;
}

std::string summarize_manifests(const std::string& root)
{
    if (!fs::exists(root)) throw UsageError("no such directory: " + root);
    std::vector<fs::path> found;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file() && entry.path().filename() == "manifest.json") found.push_back(entry.path());
    }
    std::sort(found.begin(), found.end());
    std::ostringstream out;
    out << "name\tconfig_hash\texit\tverified\tchecks\tfailed\tdirectory\n";
    for (const auto& path : found) {
        std::ifstream in(path);
        json m;
        try {
            m = json::parse(in);
        } catch (const json::exception& e) {
            out << "?\t?\t?\t?\t?\tunreadable manifest\t" << path.parent_path().string() << '\n';
            continue;
        }
        std::size_t passed = 0, total = 0;
        std::string failed;
        for (const auto& c : m.value("checks", json::array())) {
            ++total;
            if (c.value("passed", false)) {
                ++passed;
            } else {
                failed += (failed.empty() ? "" : ",") + c.value("name", std::string("?"));
            }
        }
        out << m.value("name", std::string("?")) << '\t' << m.value("config_hash", std::string("?")) << '\t'
            << m.value("exit_code", -1) << '\t' << (m.value("verified", false) ? "yes" : "no") << '\t' << passed
            << '/' << total << '\t' << (failed.empty() ? "-" : failed) << '\t' << path.parent_path().string()
            << '\n';
    }
    if (found.empty()) out << "(no manifests below " << root << ")\n";
    return out.str();
}

}  // namespace driftlab
