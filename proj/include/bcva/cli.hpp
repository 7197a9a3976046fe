#pragma once

#include <map>
#include <string>
#include <vector>

namespace bcva {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int other = 1;
inline constexpr int config = 2;
inline constexpr int validation = 3;
inline constexpr int accuracy = 4;
} // namespace exit_code

/// Runs "run --experiment ..." and returns the process status. Errors go to
/// stderr as one JSON line.
int parse_and_run(int argc, const char* const* argv, const std::map<std::string, std::string>& env);

/// Snapshot of the process environment.
std::map<std::string, std::string> environment_map();

} // namespace bcva
