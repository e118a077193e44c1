#pragma once

#include <chrono>

namespace gridkcf {

struct Stopwatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    void reset() { t0 = std::chrono::steady_clock::now(); }

    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

} // namespace gridkcf
