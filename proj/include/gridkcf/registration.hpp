#pragma once

#include <cstdint>
#include <vector>

#include "gridkcf/channel_stack.hpp"
#include "gridkcf/homography.hpp"
#include "gridkcf/parallel.hpp"

namespace gridkcf {

struct Keypoint {
    int x = 0, y = 0;
    float strength = 0.0f;
};

// 11x11 zero-mean unit-norm patch around a keypoint.
struct Descriptor {
    double x = 0.0, y = 0.0;
    std::vector<float> patch; // 121 values
};

struct Match {
    Point2d p; // frame A
    Point2d q; // frame B
    double score = 0.0; // descriptor distance, lower is better
};

// Harris corners, non-max suppressed over an 11x11 neighbourhood, strongest
// first. Flat images yield an empty list. Needs at least 16x16 pixels.
std::vector<Keypoint> detect_keypoints(const ChannelStack& gray, int max_count);

std::vector<Descriptor> extract_descriptors(const ChannelStack& gray,
                                            const std::vector<Keypoint>& keypoints);

// Mutual nearest neighbours passing the ratio test best < ratio * second_best.
std::vector<Match> match_descriptors(const std::vector<Descriptor>& a,
                                     const std::vector<Descriptor>& b, double ratio);

// Slides frame A's patch around each match's q in frame B (+-radius) and
// replaces q with the NCC peak refined to subpixel by a 3-point parabola fit.
// Matches too close to the border are left untouched.
void refine_matches_subpixel(const ChannelStack& gray_a, const ChannelStack& gray_b,
                             std::vector<Match>& matches, int radius = 2);

struct RansacResult {
    Homography h; // maps p coordinates onto q coordinates
    std::vector<std::uint8_t> inliers;
    double inlier_rms = 0.0;
};

// 4-point DLT hypotheses, consensus by reprojection error < inlier_tol, then a
// normalized least-squares refit over the winning inliers. The refit is kept
// only when it does not worsen the inlier RMS. Deterministic for a fixed seed.
RansacResult estimate_homography_ransac(const std::vector<Match>& matches, int iterations = 1000,
                                        double inlier_tol = 2.0, std::uint64_t seed = 1);

struct RegistrationParams {
    int max_keypoints = 400;
    double match_ratio = 0.8;
    int ransac_iterations = 1000;
    double inlier_tol = 2.0;
    std::uint64_t seed = 1;
    bool subpixel = true;
};

// Full inter-frame step: keypoints + descriptors on both gray frames, ratio
// matching, optional subpixel refinement, RANSAC. Returns the homography
// mapping cur pixels onto ref pixels. Throws DataError when no consensus.
Homography register_frames(const ChannelStack& cur_gray, const ChannelStack& ref_gray,
                           const RegistrationParams& params);

struct WarpResult {
    ChannelStack frame;
    std::vector<std::uint8_t> valid; // per pixel, 1 = sampled inside the source
};

// Inverse-mapped bilinear warp of all channels onto a canvas of the same size;
// h maps source coordinates onto canvas coordinates. Out-of-source pixels are
// zero with valid = 0. Rows run in parallel when a pool is given.
WarpResult warp(const ChannelStack& frame, const Homography& h, ThreadPool* pool = nullptr);

} // namespace gridkcf
