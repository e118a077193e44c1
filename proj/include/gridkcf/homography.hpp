#pragma once

#include <array>

#include "gridkcf/channel_stack.hpp"

namespace gridkcf {

// 3x3 projective transform, row-major. Maps current-frame pixel coordinates
// into the canonical (first frame) coordinate system unless stated otherwise.
struct Homography {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static Homography identity() { return {}; }

    bool operator==(const Homography&) const = default;

    double det() const;

    // Scale so m[8] == 1. Throws on m[8] ~ 0 (point at infinity for the origin).
    Homography normalized() const;

    Homography inverse() const;

    Point2d apply(const Point2d& p) const;
};

// prev * step, renormalized. Composes an inter-frame step onto an accumulated
// to-canonical transform. Throws when the product is near singular.
Homography accumulate(const Homography& prev, const Homography& step);

} // namespace gridkcf
