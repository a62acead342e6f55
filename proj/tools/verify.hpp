#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace chaosctl {

struct CriterionRow {
    std::string criterion; ///< "c1" .. "c7"
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Runs the acceptance table. An empty filter runs every criterion;
/// otherwise only the criterion with that id ("c1" .. "c7"). Supplementary
/// diagnostics are printed as INFO lines and never affect the result.
std::vector<CriterionRow> run_acceptance(const std::string& filter, std::ostream& out, unsigned threads = 0);

bool all_pass(const std::vector<CriterionRow>& rows);

} // namespace chaosctl
