#pragma once

#include <cstdint>
#include <vector>

#include "gridkcf/channel_stack.hpp"
#include "gridkcf/features.hpp"
#include "gridkcf/io.hpp"
#include "gridkcf/kcf.hpp"
#include "gridkcf/parallel.hpp"

namespace gridkcf {

enum class Fusion { hard, soft };

Fusion parse_fusion(const std::string& name);
std::string fusion_name(Fusion f);

struct GridConfig {
    int full_roi_size = 96;
    int roi_size = 48;
    int grid_n = 4;
    double psr_threshold = 7.0;
    Fusion fusion = Fusion::soft;
    bool reuse_training_features = true;

    void validate() const;
    // uniform spacing between neighbouring ROI origins; 0 for a single ROI
    int stride() const { return grid_n > 1 ? (full_roi_size - roi_size) / (grid_n - 1) : 0; }
};

struct TrackState {
    int frame = 0;
    Point2d center;
    double best_psr = 0.0;
    bool coasting = false;
    bool lost = false;
};

// Detection window whose top-left corner puts `center` at the window middle.
Rect window_at(const Point2d& center, int size);

// grid_n x grid_n windows of roi_size tiling the full ROI centered at
// `center`, row-major. A 1x1 grid yields the single centered window.
std::vector<Rect> grid_rois(const GridConfig& cfg, const Point2d& center);

// Where per-window features come from. Implementations return raw (unwindowed)
// features of fixed dims for any same-sized window; the tracker applies the
// Hanning taper.
class FeatureSource {
public:
    virtual ~FeatureSource() = default;
    virtual ChannelStack features(const Rect& roi_px) const = 0;
    virtual int cell_size() const = 0; // pixels per feature cell
};

// Extracts features from frame pixels (fhog / raw-channels / both). Windows
// beyond the frame border replicate edge pixels via crop().
class PixelFeatureSource : public FeatureSource {
public:
    PixelFeatureSource(const ChannelStack& frame, const FeatureConfig& cfg)
        : frame_(&frame), cfg_(&cfg) {}
    ChannelStack features(const Rect& roi_px) const override;
    int cell_size() const override { return cfg_->cell_size; }

private:
    const ChannelStack* frame_;
    const FeatureConfig* cfg_;
};

// Slices windows out of one externally computed full-frame feature map using
// the round-half-up edge projection; cells beyond the map replicate the edge,
// mirroring the pixel path, so every same-sized window yields the same dims.
class MapFeatureSource : public FeatureSource {
public:
    explicit MapFeatureSource(const FeatureMap& map) : map_(&map) {}
    ChannelStack features(const Rect& roi_px) const override;
    int cell_size() const override { return map_->stride; }

private:
    const FeatureMap* map_;
};

// One response per ROI, Hanning-windowed features, input order preserved.
// ROIs are evaluated in parallel when a pool is given; each result lands in
// its own slot so the output is identical for any thread count.
std::vector<ResponseMap> detect_grid(const FilterModel& model, const FeatureSource& source,
                                     const std::vector<Rect>& rois, const KcfParams& params,
                                     ThreadPool* pool = nullptr);

struct FuseResult {
    Point2d center;
    double best_psr = 0.0;
    bool coasting = false;
};

// hard: argmax-PSR window's peak mapped to pixels. soft: PSR-weighted response
// accumulation on a shared full-ROI canvas (cyclic indices remapped to
// window-relative first), canvas argmax mapped to pixels. Either way, when no
// window clears cfg.psr_threshold the result coasts at prev_center.
FuseResult fuse(const std::vector<ResponseMap>& responses, const std::vector<Rect>& rois,
                const GridConfig& cfg, int cell_size, const Point2d& prev_center);

struct TrackerConfig {
    FeatureConfig feature;
    KcfParams kcf;
    GridConfig grid;
    int coasting_limit = 8;
};

struct TrackerStats {
    std::uint64_t frames = 0;
    std::uint64_t coasted = 0;
    // training-window containment inside the detection full ROI (the cheap
    // path that reuses the already-fetched feature map)
    std::uint64_t train_reuse_hits = 0;
    std::uint64_t train_reuse_misses = 0;
    double detect_seconds = 0.0;
    double train_seconds = 0.0;
};

class Tracker {
public:
    explicit Tracker(const TrackerConfig& cfg);

    void set_pool(ThreadPool* pool) { pool_ = pool; }

    // Trains the first model at the given ground-truth center.
    void init(const FeatureSource& source, const Point2d& center);

    // One frame: grid at the last center -> detect -> fuse -> retrain+blend
    // unless coasting.
    TrackState step(int frame_index, const FeatureSource& source);

    bool initialized() const { return initialized_; }
    const Point2d& center() const { return center_; }
    const TrackerStats& stats() const { return stats_; }

private:
    TrackerConfig cfg_;
    FilterModel model_;
    Point2d center_;
    int coast_streak_ = 0;
    bool initialized_ = false;
    ThreadPool* pool_ = nullptr;
    TrackerStats stats_;
};

} // namespace gridkcf
