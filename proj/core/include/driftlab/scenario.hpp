#pragma once

#include "driftlab/flow.hpp"
#include "driftlab/splitting.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace driftlab {

struct VerificationToggles {
    bool bochner = true;
    bool commutator = true;
    bool functionals = true;
    bool bounds = true;
    bool splitting = false;
};

struct VerificationTolerances {
    double bound = 1e-6;
    double identity = 1e-4;
    double energy_monotone = 1e-8;
    double volume = 1e-6;
    double mean = 1e-9;
    double bochner = 1e-8;
    double commutator = 1e-5;
    double forward_slack = 1e-6;
};

/// Parsed run configuration. `entries` keeps the normalized key/value pairs
/// (sorted) and is what the config hash is computed from.
struct ScenarioConfig {
    std::string name;
    ScenarioSpec spec;
    VerificationToggles verify;
    VerificationTolerances tolerances;
    SplittingTolerances splitting_tolerances;
    std::optional<double> splitting_t0;
    std::optional<double> splitting_t1;
    std::string output_dir;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> entries;

    std::string canonical_text() const;
    std::string hash() const;
};

/// Raw document: ordered key/value entries plus `sweep.<key>` axes.
struct ConfigDocument {
    std::map<std::string, std::string> entries;
    std::vector<std::pair<std::string, std::vector<std::string>>> sweeps;
};

/// Parses `key = value` lines (# comments, blank lines ignored). Unknown keys,
/// duplicates and malformed lines raise ConfigurationError naming the line.
ConfigDocument parse_document(const std::string& text, const std::string& origin = "<config>");
ConfigDocument load_document(const std::string& path);

/// Builds and validates a configuration from plain entries.
ScenarioConfig build_scenario(const std::map<std::string, std::string>& entries);
ScenarioConfig parse_scenario(const std::string& text, const std::string& origin = "<config>");
ScenarioConfig load_scenario(const std::string& path);

/// Cartesian expansion of the sweep axes; the run name gets a numeric suffix.
std::vector<ScenarioConfig> expand_sweep(const ConfigDocument& doc);

/// Real number literal, `a/b`, `log(x)`, `sqrt(x)`, `exp(x)` or `pi`.
double parse_real(const std::string& text);

/// Every key accepted in a config document.
const std::vector<std::string>& known_keys();

}  // namespace driftlab
