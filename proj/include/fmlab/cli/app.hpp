#pragma once

#include <string>
#include <vector>

namespace fmlab::cli {

// Exit codes: 0 success, 1 a check or bound was violated (or training
// diverged), 2 usage or configuration error.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace fmlab::cli
