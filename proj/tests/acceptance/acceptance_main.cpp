// Acceptance gate: one PASS/FAIL line per criterion.
//   driftlab_acceptance                 all criteria
//   driftlab_acceptance --criterion N   only N (repeatable)

#include "driftlab/acceptance.hpp"

#include <cstdlib>
#include <cstring>
#include <iostream>

int main(int argc, char** argv)
{
    std::vector<int> ids;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            ids.push_back(std::atoi(argv[++i]));
        } else {
            std::cerr << "usage: " << argv[0] << " [--criterion N]...\n";
            return 2;
        }
    }
    bool all = true;
    for (const auto& r : driftlab::run_acceptance(ids)) {
        std::cout << driftlab::format_criterion(r) << std::endl;
        all = all && r.passed;
    }
    return all ? 0 : 1;
}
