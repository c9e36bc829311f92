// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "asem/error.hpp"

namespace asem::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kDataError = 3,
  kNumericError = 4,
};

ExitCode exit_code_for(ErrorCode code) noexcept;

/// `asem generate|train|eval|compare|validate` with --config, --set key=value,
/// --out, --jobs, --seed. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace asem::cli
