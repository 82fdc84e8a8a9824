// SPDX-FileCopyrightText: 2026 The voxnt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace voxnt::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,    // configuration or usage error, nothing processed
    kExitPartial = 2,  // some inputs failed, the rest were processed
};

// Entry point shared by the executable and the tests. `args[0]` is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace voxnt::cli
