// validate.hpp: desk-scale checks of the network code against brute force, exact limits and invariants.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tempo::cli {

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;      // worst deviation observed
    double tolerance = 0.0;
    std::string detail;
};

// Each check is deterministic (fixed seeds); the whole suite takes seconds.
CheckResult check_brute_force();
CheckResult check_rabi_limit();
CheckResult check_few_mode();
CheckResult check_diagonal_unity();
CheckResult check_conjugation();
CheckResult check_trace_hermiticity();
CheckResult check_causality();
CheckResult check_monotone_compression();
CheckResult check_error_bound();

std::vector<CheckResult> run_validation();

void print_check(std::ostream& os, const CheckResult& r);

}  // namespace tempo::cli
