#pragma once

#include <string>
#include <vector>

#include "gridkcf/channel_stack.hpp"

namespace gridkcf {

enum class FeatureKind {
    fhog,           // 31-channel gradient histogram features on a gray view
    raw_channels,   // mean-pooled spectral bands, per-channel mean removed
    fhog_plus_raw,  // both, concatenated on the same cell grid
    deep_from_file, // externally computed maps, loaded from FMAP files
};

// Throws ConfigError on unknown names. Accepted: "fhog", "raw-channels",
// "fhog-plus-raw", "deep-from-file".
FeatureKind parse_feature_kind(const std::string& name);
std::string feature_kind_name(FeatureKind kind);

struct FeatureConfig {
    FeatureKind kind = FeatureKind::fhog;
    int cell_size = 4;
    // Channels used to build the gray view for fhog and the band selection for
    // raw features. Empty = all channels (mean for gray). Three entries are
    // treated as an R,G,B triple.
    std::vector<int> channel_subset;
};

// 31-channel histogram-of-gradients features on a cell grid of
// floor(h/cell) x floor(w/cell). Channel layout: 18 contrast-sensitive
// orientation bins, 9 contrast-insensitive bins, 4 gradient-energy texture
// channels. Input must be single channel and at least 2*cell_size on each side.
ChannelStack extract_fhog(const ChannelStack& gray, int cell_size);

// Mean-pools every (selected) channel onto the same cell grid as extract_fhog
// and removes each channel's mean over the window, so a constant window maps
// to all zeros.
ChannelStack extract_raw(const ChannelStack& img, int cell_size,
                         const std::vector<int>& subset = {});

// Channel-wise concatenation. Spatial dims must match.
ChannelStack concat_channels(const ChannelStack& a, const ChannelStack& b);

// Dispatch on cfg.kind for the kinds computable from pixels. deep_from_file is
// rejected here; those maps are loaded, not extracted.
ChannelStack extract_features(const ChannelStack& img, const FeatureConfig& cfg);

// Maps a pixel rectangle onto a feature grid with the given stride using
// round-half-up on both edges, clamped to the map and never smaller than one
// cell. Throws DataError when the rectangle misses the map entirely.
Rect project_roi(const Rect& roi_px, int stride, int map_w, int map_h);

// Periodic-window taper: w[n] = 0.5*(1 - cos(2*pi*n/(N-1))), and [1] for N=1.
std::vector<float> hann(int n);

// Applies the separable 2-D taper to every channel.
ChannelStack hann_window(const ChannelStack& features);

} // namespace gridkcf
