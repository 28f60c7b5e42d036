#include "driftlab/acceptance.hpp"
#include "driftlab/experiment.hpp"
#include "driftlab/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace driftlab;

int report_error(const Error& e)
{
    std::cerr << error_line(e.kind(), e.what()) << '\n';
    return exit_code_for(e);
}

int print_outcome(const RunOutcome& o)
{
    if (!o.error_kind.empty()) {
        std::cerr << error_line(o.error_kind, o.error_message) << '\n';
        return o.exit_code;
    }
    for (const auto& c : o.checks) {
        std::cout << (c.passed ? "ok   " : "FAIL ") << c.name << " value=" << c.value << " tol=" << c.tolerance
                  << '\n';
    }
    std::cout << o.name << ": " << (o.verified ? "verified" : "verification failed") << ", artifacts in "
              << o.directory << '\n';
    if (o.exit_code == kExitVerification) {
        std::cerr << error_line("verification_failure", o.name + " failed at least one check") << '\n';
    }
    return o.exit_code;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Drift-Laplacian spectra under the modified Ricci flow"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    bool strict = false;
    int jobs = 1;
    std::vector<int> criteria;
    std::string report_root;

    auto* run = app.add_subcommand("run", "Run one scenario");
    run->add_option("--config", config_path, "Scenario file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory");
    run->add_flag("--strict", strict, "Exit 5 when a verification fails");

    auto* sweep = app.add_subcommand("sweep", "Run the cartesian grid of a scenario's sweep.* axes");
    sweep->add_option("--config", config_path, "Scenario file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", out_dir, "Root directory of the sweep");
    sweep->add_option("--jobs", jobs, "Parallel runs")->check(CLI::PositiveNumber);
    sweep->add_flag("--strict", strict, "Exit 5 when a verification fails");

    auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
    verify->add_option("--criterion", criteria, "Criterion numbers (default: all)")->check(CLI::Range(1, kCriterionCount));

    auto* report = app.add_subcommand("report", "Summarize run manifests");
    report->add_option("--out", report_root, "Directory to scan (default: output root)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    ExecuteOptions options;
    options.out_dir = out_dir;
    options.strict = strict;

    try {
        if (*run) {
            const ScenarioConfig cfg = load_scenario(config_path);
            return print_outcome(execute(cfg, options));
        }
        if (*sweep) {
            const auto configs = expand_sweep(load_document(config_path));
            const auto outcomes = run_sweep(configs, options, jobs);
            int code = kExitOk;
            for (const auto& o : outcomes) {
                const int c = print_outcome(o);
                if (code == kExitOk) code = c;
            }
            return code;
        }
        if (*verify) {
            bool all = true;
            for (const auto& r : run_acceptance(criteria)) {
                std::cout << format_criterion(r) << std::endl;
                all = all && r.passed;
            }
            return all ? kExitOk : kExitVerification;
        }
        if (*report) {
            std::cout << summarize_manifests(report_root.empty() ? default_output_root() : report_root);
            return kExitOk;
        }
    } catch (const Error& e) {
        return report_error(e);
    } catch (const std::exception& e) {
        std::cerr << error_line("internal_error", e.what()) << '\n';
        return kExitOther;
    }
    return kExitOther;
}
