#include "gridkcf/tracker.hpp"

#include <algorithm>
#include <cmath>

#include "gridkcf/errors.hpp"
#include "gridkcf/stopwatch.hpp"

namespace gridkcf {

Fusion parse_fusion(const std::string& name) {
    if (name == "hard") return Fusion::hard;
    if (name == "soft") return Fusion::soft;
    throw ConfigError("unknown fusion mode '" + name + "' (expected hard or soft)");
}

std::string fusion_name(Fusion f) { return f == Fusion::hard ? "hard" : "soft"; }

void GridConfig::validate() const {
    if (roi_size <= 0 || full_roi_size <= 0)
        throw ConfigError("grid: roi_size and full_roi_size must be positive");
    if (roi_size > full_roi_size)
        throw ConfigError("grid: roi_size (" + std::to_string(roi_size) +
                          ") must not exceed full_roi_size (" + std::to_string(full_roi_size) + ")");
    if (grid_n < 1) throw ConfigError("grid: grid_n must be >= 1");
    if (grid_n > 1) {
        const int span = full_roi_size - roi_size;
        if (span <= 0 || span % (grid_n - 1) != 0)
            throw ConfigError("grid: full_roi_size - roi_size (" + std::to_string(span) +
                              ") must split into " + std::to_string(grid_n - 1) +
                              " positive integer strides");
    }
    if (psr_threshold < 0.0) throw ConfigError("grid: psr_threshold must be >= 0");
}

Rect window_at(const Point2d& center, int size) {
    const int x = static_cast<int>(std::lround(center.x)) - size / 2;
    const int y = static_cast<int>(std::lround(center.y)) - size / 2;
    return {x, y, size, size};
}

namespace {

Rect bounding_rect(const std::vector<Rect>& rects) {
    Rect out = rects[0];
    for (const auto& r : rects) {
        const int x2 = std::max(out.x + out.w, r.x + r.w);
        const int y2 = std::max(out.y + out.h, r.y + r.h);
        out.x = std::min(out.x, r.x);
        out.y = std::min(out.y, r.y);
        out.w = x2 - out.x;
        out.h = y2 - out.y;
    }
    return out;
}

} // namespace

std::vector<Rect> grid_rois(const GridConfig& cfg, const Point2d& center) {
    cfg.validate();
    const Rect full = window_at(center, cfg.full_roi_size);
    std::vector<Rect> rois;
    rois.reserve(static_cast<std::size_t>(cfg.grid_n) * cfg.grid_n);
    if (cfg.grid_n == 1) {
        const int off = (cfg.full_roi_size - cfg.roi_size) / 2;
        rois.push_back({full.x + off, full.y + off, cfg.roi_size, cfg.roi_size});
        return rois;
    }
    const int s = cfg.stride();
    for (int row = 0; row < cfg.grid_n; ++row)
        for (int col = 0; col < cfg.grid_n; ++col)
            rois.push_back({full.x + col * s, full.y + row * s, cfg.roi_size, cfg.roi_size});
    return rois;
}

ChannelStack PixelFeatureSource::features(const Rect& roi_px) const {
    return extract_features(crop(*frame_, roi_px), *cfg_);
}

ChannelStack MapFeatureSource::features(const Rect& roi_px) const {
    const int s = map_->stride;
    const ChannelStack& fm = map_->features;
    // round-half-up edge projection, unclamped so dims only depend on the
    // window size; off-map cells replicate the nearest map cell just like the
    // pixel path's replicate-edge crop
    auto rhu = [](double v) { return static_cast<int>(std::floor(v + 0.5)); };
    const int x0 = rhu(static_cast<double>(roi_px.x) / s);
    const int x1 = rhu(static_cast<double>(roi_px.x + roi_px.w) / s);
    const int y0 = rhu(static_cast<double>(roi_px.y) / s);
    const int y1 = rhu(static_cast<double>(roi_px.y + roi_px.h) / s);
    if (x1 <= x0 || y1 <= y0)
        throw ContractError("feature map window collapsed to zero cells");
    return crop(fm, {x0, y0, x1 - x0, y1 - y0});
}

std::vector<ResponseMap> detect_grid(const FilterModel& model, const FeatureSource& source,
                                     const std::vector<Rect>& rois, const KcfParams& params,
                                     ThreadPool* pool) {
    if (model.empty()) throw ContractError("detect_grid: model is untrained");
    if (rois.empty()) throw ContractError("detect_grid: no rois");

    std::vector<ResponseMap> out(rois.size());
    auto work = [&](int i) {
        ChannelStack f = hann_window(source.features(rois[static_cast<std::size_t>(i)]));
        out[static_cast<std::size_t>(i)] = detect(model, f, params);
    };
    if (pool) {
        pool->parallel_for(static_cast<int>(rois.size()), work);
    } else {
        for (int i = 0; i < static_cast<int>(rois.size()); ++i) work(i);
    }
    return out;
}

FuseResult fuse(const std::vector<ResponseMap>& responses, const std::vector<Rect>& rois,
                const GridConfig& cfg, int cell_size, const Point2d& prev_center) {
    if (responses.empty()) throw ContractError("fuse: empty response list");
    if (responses.size() != rois.size())
        throw ContractError("fuse: responses and rois are misaligned");
    if (cell_size <= 0) throw ContractError("fuse: cell_size must be positive");

    FuseResult res;
    res.center = prev_center;
    for (const auto& r : responses) res.best_psr = std::max(res.best_psr, r.psr);

    if (cfg.fusion == Fusion::hard) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < responses.size(); ++i)
            if (responses[i].psr > responses[best].psr) best = i;
        if (!(responses[best].psr > cfg.psr_threshold)) {
            res.coasting = true;
            return res;
        }
        const ResponseMap& r = responses[best];
        const Rect& roi = rois[best];
        const int dr = wrapped_shift(r.peak_row, r.h);
        const int dc = wrapped_shift(r.peak_col, r.w);
        res.center = {roi.x + roi.w / 2.0 + dc * static_cast<double>(cell_size),
                      roi.y + roi.h / 2.0 + dr * static_cast<double>(cell_size)};
        return res;
    }

    // soft: weight supra-threshold responses by PSR and accumulate them on a
    // full-ROI canvas at feature-grid resolution
    bool any = false;
    for (const auto& r : responses)
        if (r.psr > cfg.psr_threshold) any = true;
    if (!any) {
        res.coasting = true;
        return res;
    }

    const Rect full = bounding_rect(rois);
    const int cw = (full.w + cell_size - 1) / cell_size;
    const int ch = (full.h + cell_size - 1) / cell_size;
    std::vector<double> canvas(static_cast<std::size_t>(cw) * ch, 0.0);

    for (std::size_t i = 0; i < responses.size(); ++i) {
        const ResponseMap& r = responses[i];
        if (!(r.psr > cfg.psr_threshold)) continue;
        const double beta = r.psr;
        const int ox = static_cast<int>(std::lround(static_cast<double>(rois[i].x - full.x) / cell_size));
        const int oy = static_cast<int>(std::lround(static_cast<double>(rois[i].y - full.y) / cell_size));
        for (int pr = 0; pr < r.h; ++pr) {
            const int cr = oy + pr;
            if (cr < 0 || cr >= ch) continue;
            // window-relative position pr holds the cyclic bin for displacement
            // pr - (h-1)/2; centering this way keeps the even-dim boundary bin
            // at +h/2, the same side wrapped_shift puts it on
            const int rr = (pr - (r.h - 1) / 2 + r.h) % r.h;
            for (int pc = 0; pc < r.w; ++pc) {
                const int cc = ox + pc;
                if (cc < 0 || cc >= cw) continue;
                const int rc = (pc - (r.w - 1) / 2 + r.w) % r.w;
                canvas[static_cast<std::size_t>(cr) * cw + cc] +=
                    beta * r.values[static_cast<std::size_t>(rr) * r.w + rc];
            }
        }
    }

    int qr = 0, qc = 0;
    double best = canvas[0];
    for (int rr = 0; rr < ch; ++rr)
        for (int cc = 0; cc < cw; ++cc)
            if (canvas[static_cast<std::size_t>(rr) * cw + cc] > best) {
                best = canvas[static_cast<std::size_t>(rr) * cw + cc];
                qr = rr;
                qc = cc;
            }

    // the zero-displacement cell of a window sits at its center, so shift by
    // the half-window remainder to agree exactly with the hard mapping
    const double dx = rois[0].w / 2.0 - ((responses[0].w - 1) / 2) * static_cast<double>(cell_size);
    const double dy = rois[0].h / 2.0 - ((responses[0].h - 1) / 2) * static_cast<double>(cell_size);
    res.center = {full.x + qc * static_cast<double>(cell_size) + dx,
                  full.y + qr * static_cast<double>(cell_size) + dy};
    return res;
}

Tracker::Tracker(const TrackerConfig& cfg) : cfg_(cfg) {
    cfg_.grid.validate();
    cfg_.kcf.validate();
    if (cfg_.coasting_limit < 0) throw ConfigError("tracker: coasting_limit must be >= 0");
}

void Tracker::init(const FeatureSource& source, const Point2d& center) {
    center_ = center;
    ChannelStack feats = hann_window(source.features(window_at(center_, cfg_.grid.roi_size)));
    model_ = train(feats, cfg_.kcf);
    coast_streak_ = 0;
    initialized_ = true;
}

TrackState Tracker::step(int frame_index, const FeatureSource& source) {
    if (!initialized_) throw ContractError("tracker: step before init");
    ++stats_.frames;

    const auto rois = grid_rois(cfg_.grid, center_);
    Stopwatch sw;
    const auto responses = detect_grid(model_, source, rois, cfg_.kcf, pool_);
    stats_.detect_seconds += sw.seconds();

    const FuseResult fr = fuse(responses, rois, cfg_.grid, source.cell_size(), center_);

    TrackState st;
    st.frame = frame_index;
    st.best_psr = fr.best_psr;
    st.coasting = fr.coasting;

    if (fr.coasting) {
        ++coast_streak_;
        ++stats_.coasted;
    } else {
        coast_streak_ = 0;
        center_ = fr.center;
        const Rect troi = window_at(center_, cfg_.grid.roi_size);
        // training window inside the detection full ROI means the already
        // fetched map could serve training too; count it either way
        if (cfg_.grid.reuse_training_features && bounding_rect(rois).contains(troi))
            ++stats_.train_reuse_hits;
        else
            ++stats_.train_reuse_misses;

        sw.reset();
        ChannelStack feats = hann_window(source.features(troi));
        model_ = update(model_, train(feats, cfg_.kcf), cfg_.kcf.learning_rate);
        stats_.train_seconds += sw.seconds();
    }

    st.center = center_;
    st.lost = coast_streak_ > cfg_.coasting_limit;
    return st;
}

} // namespace gridkcf
