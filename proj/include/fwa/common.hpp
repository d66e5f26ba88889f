#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fwa {

// Thrown when an input file or config document is malformed.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a model invariant or hard constraint is violated at runtime.
struct InvariantError : std::runtime_error {
    explicit InvariantError(const std::string& msg) : std::runtime_error(msg) {}
};

#define FWA_CHECK(cond, msg)                                                  \
    do {                                                                      \
        if (!(cond)) {                                                        \
            throw ::fwa::InvariantError(std::string(msg) + " [" __FILE__ ":" \
                                        + std::to_string(__LINE__) + "]");    \
        }                                                                     \
    } while (0)

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

// Reads FWA_LOG={error|info|debug}; defaults to error.
LogLevel log_level();

void log_info(const std::string& msg);
void log_debug(const std::string& msg);

} // namespace fwa
