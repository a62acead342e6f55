#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace chaosctl {

/// Runs one chaosctl invocation. `args` excludes the program name.
/// Returns 0 on success, 1 on numerical/domain failures, 2 on usage errors.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace chaosctl
