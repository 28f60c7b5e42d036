#pragma once

#include "driftlab/flow.hpp"
#include "driftlab/oracle.hpp"
#include "driftlab/splitting.hpp"

#include <string>
#include <vector>

namespace driftlab {

/// %.17g with '.' decimal point; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double v);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// Comma separated, '\n' line endings, numbers through format_number.
std::string to_csv(const Table& table);

/// Rows at the output times: t, lambda_0..lambda_k, bound_1..bound_k, volume,
/// E_1..E_m, residual_IJ, residual_commutator. `functionals` may be null and
/// `commutator` empty (columns become nan).
Table trajectory_table(const FlowTrajectory& traj, const FunctionalReport* functionals,
                       const std::vector<double>& commutator);

/// s = t - t0 and the closed-form bound curve of every tracked lambda_i(t0);
/// nan past a curve's horizon.
Table bounds_table(const FlowTrajectory& traj);

std::string spectral_result_json(const SpectralResult& result);
/// Array of spectral results at the output times.
std::string spectra_json(const FlowTrajectory& traj);
std::string oracle_report_json(const OracleReport& report);
std::string certificate_json(const SplittingOutcome& outcome);

}  // namespace driftlab
