#pragma once

#include <string>
#include <vector>

namespace frbm {

/// Full command-line entry: parses the subcommand and flags, runs it, writes
/// outputs plus their sibling run manifests, and maps failures to exit codes
/// (0 success, 1 bad usage or validation, 2 runtime failure). Results go to
/// stdout or files; diagnostics and progress go to stderr.
int dispatch(const std::vector<std::string>& args);
int dispatch(int argc, char** argv);

}  // namespace frbm
