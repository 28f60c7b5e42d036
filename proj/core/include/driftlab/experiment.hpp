#pragma once

#include "driftlab/errors.hpp"
#include "driftlab/scenario.hpp"

#include <string>
#include <vector>

namespace driftlab {

enum ExitCode : int {
    kExitOk = 0,
    kExitOther = 1,
    kExitConfig = 2,
    kExitStability = 3,
    kExitSolver = 4,
    kExitVerification = 5,
};

/// Exit code for a library error kind.
int exit_code_for(const Error& error);
/// `error: kind=<kind> message="<escaped message>"`
std::string error_line(const std::string& kind, const std::string& message);

/// Output root used when neither --out nor the config names a directory:
/// $DRIFTLAB_OUT_ROOT, else "runs".
std::string default_output_root();

struct CheckResult {
    std::string name;
    bool passed = true;
    double value = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct ExecuteOptions {
    /// Directory of this run; empty means config.output_dir, then <root>/<name>.
    std::string out_dir;
    std::string out_root;
    bool strict = false;
};

struct RunOutcome {
    std::string name;
    std::string directory;
    std::vector<std::string> files;
    std::vector<CheckResult> checks;
    bool verified = true;
    int exit_code = kExitOk;
    std::string error_kind;
    std::string error_message;
};

/// Runs the flow and the enabled verifications and writes trajectory.csv,
/// bounds.csv, spectra.json, certificate.json (when splitting is enabled) and
/// manifest.json. Errors are reported in the outcome, never thrown; no files
/// are written when the run fails before producing a trajectory.
RunOutcome execute(const ScenarioConfig& config, const ExecuteOptions& options = {});

/// Runs every configuration on up to `jobs` threads, each in <root>/<name>,
/// and writes sweep.csv and sweep_manifest.json in the root. Outcomes keep the
/// input order.
std::vector<RunOutcome> run_sweep(const std::vector<ScenarioConfig>& configs, const ExecuteOptions& options,
                                  int jobs);

/// One line per manifest.json found below `root`.
std::string summarize_manifests(const std::string& root);

}  // namespace driftlab
