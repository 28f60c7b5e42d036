#pragma once

#include <string>
#include <vector>

namespace driftlab {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
    /// Wall-clock limit in seconds, 0 when the criterion has none.
    double time_limit = 0.0;
};

constexpr int kCriterionCount = 10;

/// Runs one criterion (1..kCriterionCount). Never throws: errors become a failed result.
CriterionResult run_criterion(int id);

/// Runs the given criteria in order, all of them when `ids` is empty.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids = {});

/// `PASS [id] name (seconds s): detail`
std::string format_criterion(const CriterionResult& result);

}  // namespace driftlab
