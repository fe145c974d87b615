// app.hpp: the tempo command-line driver, callable in-process for tests.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tempo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;  // validation failure or unexpected error
inline constexpr int kExitSchema = 2;
inline constexpr int kExitNumeric = 3;

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tempo::cli
