#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace gridkcf {

// Verbosity comes from GRIDKCF_VERBOSE: 0 = quiet (default for warnings only),
// 1 = progress, 2 = debug. Cached on first use.
inline int log_level() {
    static const int level = [] {
        const char* env = std::getenv("GRIDKCF_VERBOSE");
        if (!env || !*env) return 0;
        return std::atoi(env);
    }();
    return level;
}

inline void log_warn(const std::string& msg) {
    std::fprintf(stderr, "warning: %s\n", msg.c_str());
}

inline void log_info(const std::string& msg) {
    if (log_level() >= 1) std::fprintf(stderr, "%s\n", msg.c_str());
}

inline void log_debug(const std::string& msg) {
    if (log_level() >= 2) std::fprintf(stderr, "debug: %s\n", msg.c_str());
}

} // namespace gridkcf
