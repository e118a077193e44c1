#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridkcf/channel_stack.hpp"
#include "gridkcf/io.hpp"
#include "gridkcf/parallel.hpp"

namespace gridkcf {

struct TargetSpec {
    double w = 20.0, h = 10.0;           // bounding box, px
    Point2d position;                     // initial center
    std::vector<Point2d> waypoints;       // visited in order at constant speed
    double speed = 0.0;                   // px/s along the path
    std::vector<double> albedo;           // per channel, cycled when shorter
};

struct JitterSpec {
    double max_translation_px = 0.0; // per frame, each axis, uniform
    double max_rotation_deg = 0.0;   // per frame about the canvas center
};

struct BackgroundSpec {
    double scale = 24.0;  // base noise wavelength, px
    int octaves = 3;
    double contrast = 0.5;
    double base = 0.5;
};

struct ScenarioSpec {
    int width = 256, height = 256;
    int frames = 10;
    double fps = 1.42;
    int channels = 8;
    std::uint64_t seed = 1;
    BackgroundSpec background;
    JitterSpec camera_jitter;
    std::vector<TargetSpec> targets;
    std::vector<Rect> occluders;          // opaque, static in canonical coords
    double occlusion_coverage = 1.0;      // covered fraction that flags "occluded"

    void validate() const;
};

ScenarioSpec load_scenario(const std::string& path);
ScenarioSpec parse_scenario(const std::string& json_text, const std::string& origin);

// Center of target `t` on frame `frame` (canonical coordinates). Exposed so
// tests can check path arithmetic without rendering.
Point2d target_center_at(const ScenarioSpec& spec, std::size_t t, int frame);

// Renders the scenario into out_dir: HSIF frames, one ground-truth CSV per
// target, manifest with exact to-canonical homographies. Byte-identical for
// identical spec + seed. Frames render in parallel when a pool is given.
SequenceManifest generate(const ScenarioSpec& spec, const std::string& out_dir,
                          ThreadPool* pool = nullptr);

// Every factor-th frame, fps divided by factor. Frame indices keep their
// original values so ground-truth alignment is untouched (evaluation
// intersects on frame index); homographies are already to-canonical and carry
// over unchanged.
SequenceManifest downsample(const SequenceManifest& manifest, int factor);

} // namespace gridkcf
