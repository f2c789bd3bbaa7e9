#pragma once

// Command-line entry point shared by the gnet tool and the tests.
//
// Exit codes: 0 success, 1 invalid data or failed run, 2 usage error.

namespace gnet {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitUsage = 2;

int cli_main(int argc, char** argv);

}  // namespace gnet
