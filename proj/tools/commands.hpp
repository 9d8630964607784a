#pragma once

#include <string>
#include <vector>

namespace arraycav::cli {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigFailure = 2;
inline constexpr int kNumericFailure = 3;
inline constexpr int kConsistencyFailure = 4;

int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace arraycav::cli
