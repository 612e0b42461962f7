#pragma once

#include <string>
#include <vector>

namespace vocscreen::cli {

// Exit codes: 0 success, 2 usage/config error, 3 runtime estimation failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitEstimation = 3;

// Full command-line entry point (parse + dispatch). Exposed so tests can
// drive the CLI in-process.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace vocscreen::cli
