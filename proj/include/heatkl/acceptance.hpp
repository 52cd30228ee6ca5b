#pragma once

// The acceptance suite: eleven pass/fail checks with fixed tolerances.

#include <iosfwd>
#include <string>
#include <vector>

namespace heatkl {

struct AcceptanceOptions {
    bool quick = false;          // skip the sweep-based criteria 6, 7, 9, 10
    bool flip_e4_sign = false;   // mutation: negate E4 before the Gaussian route
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double threshold = 0.0;
    double seconds = 0.0;
    double time_limit = 0.0;  // 0: none
    std::string detail;
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {});

/// One line per criterion; returns true if all passed.
bool print_acceptance(std::ostream& out, const std::vector<CriterionResult>& results);

}  // namespace heatkl
