#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridkcf/channel_stack.hpp"
#include "gridkcf/homography.hpp"

namespace gridkcf {

// ---- frame containers -------------------------------------------------------
//
// HSIF is the hyperspectral frame container: "HSIF" magic, u16 version (1),
// u32 width, u32 height, u32 channels, u8 dtype (0 = f32), then channel-major
// row-major f32 planes. Everything little-endian.
//
// load_frame also accepts binary PGM (P5) and PPM (P6) rasters with maxval 255;
// sample values are normalized by 1/255 into [0,1].

ChannelStack load_frame(const std::string& path);
ChannelStack load_hsif(const std::string& path);
void save_hsif(const ChannelStack& stack, const std::string& path);

// 8-bit raster writers for quick visual inspection. Values are clamped to
// [0,1] and quantized, so these do not round-trip exactly.
void save_pgm(const ChannelStack& single_channel, const std::string& path);
void save_ppm(const ChannelStack& three_channel, const std::string& path);

// ---- feature map container ---------------------------------------------------
//
// FMAP carries an externally produced feature map for one frame: "FMAP" magic,
// u16 version (1), u32 width, u32 height, u32 channels, u16 stride (pixels per
// feature cell), then f32 planes as in HSIF. width/height are in cells.

struct FeatureMap {
    ChannelStack features;
    int stride = 1;
};

FeatureMap load_fmap(const std::string& path);
void save_fmap(const FeatureMap& map, const std::string& path);

// ---- sequence manifest -------------------------------------------------------

struct FrameEntry {
    int index = 0;
    double timestamp = 0.0;
    std::string path; // relative to the manifest's directory unless absolute
    std::optional<Homography> to_canonical;
};

struct SequenceManifest {
    double fps = 0.0;
    int channels = 0;
    std::vector<double> wavelengths_nm;      // optional metadata
    std::vector<std::string> ground_truth;   // one CSV per target
    std::vector<FrameEntry> frames;
    std::string base_dir;                    // set on load, not serialized

    bool has_homographies() const {
        return !frames.empty() && frames.front().to_canonical.has_value();
    }
};

SequenceManifest load_manifest(const std::string& path);
void save_manifest(const SequenceManifest& manifest, const std::string& path);

// Joins a manifest-relative path with the manifest's directory.
std::string resolve_path(const SequenceManifest& manifest, const std::string& rel);

// ---- CSV: ground truth and trajectories ---------------------------------------

struct GroundTruthEntry {
    int frame = 0;
    double cx = 0.0, cy = 0.0;
    double w = 0.0, h = 0.0;
    bool occluded = false;
};

std::vector<GroundTruthEntry> load_ground_truth(const std::string& path);
void save_ground_truth(const std::vector<GroundTruthEntry>& entries, const std::string& path);

struct TrajectoryPoint {
    int frame = 0;
    double cx = 0.0, cy = 0.0;
    double psr = 0.0;
    bool coasting = false;
};

std::vector<TrajectoryPoint> load_trajectory(const std::string& path);
void save_trajectory(const std::vector<TrajectoryPoint>& points, const std::string& path);

// Shortest round-trip decimal formatting, shared by every writer so outputs
// are byte-stable across runs.
std::string format_double(double v);

} // namespace gridkcf
