#pragma once

#include <ostream>

namespace pco::cli {

enum ExitCode : int {
  kOk = 0,
  kOther = 1,
  kConfig = 2,
  kData = 3,
  kDimension = 4,
  kVerification = 5,
};

/// Entry point of the `pco` tool: simulate | select | estimate | verify | report.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pco::cli
