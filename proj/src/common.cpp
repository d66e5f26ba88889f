#include "fwa/common.hpp"

#include <cstdlib>
#include <cstring>
#include <iostream>

namespace fwa {

LogLevel log_level() {
    static LogLevel lvl = [] {
        const char* env = std::getenv("FWA_LOG");
        if (env == nullptr) return LogLevel::Error;
        if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
        if (std::strcmp(env, "info") == 0) return LogLevel::Info;
        return LogLevel::Error;
    }();
    return lvl;
}

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::Info) std::cerr << "[info] " << msg << "\n";
}

void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::Debug) std::cerr << "[debug] " << msg << "\n";
}

} // namespace fwa
