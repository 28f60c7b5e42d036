#include "driftlab/serialization.hpp"

#include "driftlab/comparison.hpp"
#include "driftlab/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <limits>

namespace driftlab {

namespace {

using nlohmann::json;

json number(double v)
{
    if (std::isfinite(v)) return v;
    return format_number(v);
}

json numbers(const std::vector<double>& v)
{
    json a = json::array();
    for (double x : v) a.push_back(number(x));
    return a;
}

json spectral_json(const SpectralResult& r)
{
    return json{{"t", number(r.t)},
                {"eigenvalues", numbers(r.eigenvalues)},
                {"residuals", numbers(r.residuals)},
                {"normalization", "weighted-L2"}};
}

json residuals_json(const CertificateResiduals& r)
{
    return json{{"hessian_energy", numbers(r.hessian_energy)},
                {"gradient_norm_deviation", number(r.gradient_norm_deviation)},
                {"gradient_cross", number(r.gradient_cross)},
                {"gradient_mean", number(r.gradient_mean)},
                {"decomposition", number(r.decomposition)},
                {"metric_block", number(r.metric_block)},
                {"weight_equation", number(r.weight_equation)}};
}

json tolerances_json(const SplittingTolerances& t)
{
    return json{{"eigenvalue", t.eigenvalue},
                {"hessian", t.hessian},
                {"gradient", t.gradient},
                {"decomposition", t.decomposition},
                {"factor_equation", t.factor_equation}};
}

}  // namespace

std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    for (char* p = buf; *p; ++p) {
        if (*p == ',') *p = '.';
    }
    return buf;
}

std::string to_csv(const Table& table)
{
    std::string out;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) out += ',';
        out += table.header[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_number(row[i]);
        }
        out += '\n';
    }
    return out;
}

Table trajectory_table(const FlowTrajectory& traj, const FunctionalReport* functionals,
                       const std::vector<double>& commutator)
{
    const double nan = std::numeric_limits<double>::quiet_NaN();
    Table t;
    if (traj.spectra.empty()) throw UsageError("trajectory_table needs spectra");
    const std::size_t k = traj.spectra.front().eigenvalues.size() - 1;
    const std::size_t m = traj.samples.front().scalars.size();
    t.header.push_back("t");
    for (std::size_t i = 0; i <= k; ++i) t.header.push_back("lambda_" + std::to_string(i));
    for (std::size_t i = 1; i <= k; ++i) t.header.push_back("bound_" + std::to_string(i));
    t.header.push_back("volume");
    for (std::size_t i = 1; i <= m; ++i) t.header.push_back("E_" + std::to_string(i));
    t.header.push_back("residual_IJ");
    t.header.push_back("residual_commutator");

    const auto& first = traj.spectra.front().eigenvalues;
    const double t0 = traj.t0();
    for (std::size_t j = 0; j < traj.output_indices.size(); ++j) {
        const std::size_t idx = traj.output_indices[j];
        const auto& sample = traj.samples[idx];
        std::vector<double> row{sample.t};
        const auto& ev = traj.spectra[j].eigenvalues;
        for (std::size_t i = 0; i <= k; ++i) row.push_back(i < ev.size() ? ev[i] : nan);
        for (std::size_t i = 1; i <= k; ++i) {
            const BoundCurve c = bound_curve(first[i]);
            const double s = sample.t - t0;
            row.push_back(c.valid_at(s) ? c(s) : nan);
        }
        row.push_back(sample.state.volume);
        for (std::size_t a = 0; a < m; ++a) row.push_back(functionals ? functionals->E[a][idx] : nan);
        row.push_back(functionals && !functionals->residual_IJ.empty() ? functionals->residual_IJ[idx] : nan);
        row.push_back(j < commutator.size() ? commutator[j] : nan);
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table bounds_table(const FlowTrajectory& traj)
{
    const double nan = std::numeric_limits<double>::quiet_NaN();
    Table t;
    if (traj.spectra.empty()) throw UsageError("bounds_table needs spectra");
    const auto& first = traj.spectra.front().eigenvalues;
    t.header.push_back("s");
    for (std::size_t i = 1; i < first.size(); ++i) t.header.push_back("bound_" + std::to_string(i));
    for (std::size_t idx : traj.output_indices) {
        const double s = traj.samples[idx].t - traj.t0();
        std::vector<double> row{s};
        for (std::size_t i = 1; i < first.size(); ++i) {
            const BoundCurve c = bound_curve(first[i]);
            row.push_back(c.valid_at(s) ? c(s) : nan);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::string spectral_result_json(const SpectralResult& result)
{
    return spectral_json(result).dump(2);
}

std::string spectra_json(const FlowTrajectory& traj)
{
    json a = json::array();
    for (const auto& s : traj.spectra) a.push_back(spectral_json(s));
    return a.dump(2) + "\n";
}

std::string oracle_report_json(const OracleReport& r)
{
    return json{{"name", r.name},
                {"inputs_digest", r.inputs_digest},
                {"reference", numbers(r.reference)},
                {"target", numbers(r.target)},
                {"abs_deviation", number(r.abs_deviation)},
                {"rel_deviation", number(r.rel_deviation)}}
        .dump(2);
}

std::string certificate_json(const SplittingOutcome& outcome)
{
    json j;
    j["fired"] = outcome.fired();
    if (outcome.certificate) {
        const auto& c = *outcome.certificate;
        j["k"] = c.k;
        j["t0"] = c.t0;
        j["t1"] = c.t1;
        j["hypothesis"] = {{"lambda_k_t0", number(c.lambda_k_t0)}, {"lambda_1_t1", number(c.lambda_1_t1)}};
        j["eigenvalues"] = numbers(c.eigenvalues);
        j["eigenvalue_deviation"] = number(c.eigenvalue_deviation);
        j["residuals"] = residuals_json(c.residuals);
        j["tolerances"] = tolerances_json(c.tolerances);
        j["sampled_times"] = c.sampled_times;
        j["valid"] = c.valid;
    }
    if (outcome.failure) {
        const auto& f = *outcome.failure;
        j["valid"] = false;
        j["hypothesis"] = {{"lambda_k_t0", number(f.lambda_k_t0)}, {"lambda_1_t1", number(f.lambda_1_t1)}};
        j["violated"] = f.violated;
        j["message"] = f.message;
    }
    return j.dump(2) + "\n";
}

}  // namespace driftlab
