#include "gridkcf/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "gridkcf/errors.hpp"

namespace gridkcf {

FeatureKind parse_feature_kind(const std::string& name) {
    if (name == "fhog") return FeatureKind::fhog;
    if (name == "raw-channels") return FeatureKind::raw_channels;
    if (name == "fhog-plus-raw") return FeatureKind::fhog_plus_raw;
    if (name == "deep-from-file") return FeatureKind::deep_from_file;
    throw ConfigError("unknown feature kind '" + name +
                      "' (expected fhog, raw-channels, fhog-plus-raw or deep-from-file)");
}

std::string feature_kind_name(FeatureKind kind) {
    switch (kind) {
    case FeatureKind::fhog: return "fhog";
    case FeatureKind::raw_channels: return "raw-channels";
    case FeatureKind::fhog_plus_raw: return "fhog-plus-raw";
    case FeatureKind::deep_from_file: return "deep-from-file";
    }
    return "?";
}

namespace {

constexpr int kOrientations = 9;  // unsigned directions; signed histogram has 18
constexpr float kClip = 0.2f;
constexpr float kTextureScale = 0.2357f; // 1/sqrt(18)
constexpr float kNormEps = 1e-4f;

} // namespace

ChannelStack extract_fhog(const ChannelStack& gray, int cell_size) {
    if (gray.channels() != 1)
        throw ContractError("extract_fhog: expected a single-channel image");
    if (cell_size <= 0) throw ContractError("extract_fhog: cell_size must be positive");
    const int w = gray.width(), h = gray.height();
    if (w < 2 * cell_size || h < 2 * cell_size)
        throw ContractError("extract_fhog: image " + std::to_string(w) + "x" + std::to_string(h) +
                            " smaller than two cells of " + std::to_string(cell_size));

    const int cx = w / cell_size;
    const int cy = h / cell_size;

    // direction templates for hard orientation assignment
    std::array<float, kOrientations> uu, vv;
    for (int k = 0; k < kOrientations; ++k) {
        double a = std::numbers::pi * k / kOrientations;
        uu[k] = static_cast<float>(std::cos(a));
        vv[k] = static_cast<float>(std::sin(a));
    }

    // signed orientation histogram per cell, bilinear spatial binning
    std::vector<float> hist(static_cast<std::size_t>(cy) * cx * 2 * kOrientations, 0.0f);
    auto hist_at = [&](int row, int col, int o) -> float& {
        return hist[(static_cast<std::size_t>(row) * cx + col) * 2 * kOrientations + o];
    };

    const float* img = gray.plane(0);
    auto px = [&](int x, int y) { return img[static_cast<std::size_t>(y) * w + x]; };

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            // centered differences inside, one-sided on the borders
            float dx = x == 0       ? px(1, y) - px(0, y)
                       : x == w - 1 ? px(w - 1, y) - px(w - 2, y)
                                    : 0.5f * (px(x + 1, y) - px(x - 1, y));
            float dy = y == 0       ? px(x, 1) - px(x, 0)
                       : y == h - 1 ? px(x, h - 1) - px(x, h - 2)
                                    : 0.5f * (px(x, y + 1) - px(x, y - 1));
            float mag = std::sqrt(dx * dx + dy * dy);
            if (mag == 0.0f) continue;

            int best = 0;
            float best_dot = 0.0f;
            for (int k = 0; k < kOrientations; ++k) {
                float dot = uu[k] * dx + vv[k] * dy;
                if (dot > best_dot) {
                    best_dot = dot;
                    best = k;
                } else if (-dot > best_dot) {
                    best_dot = -dot;
                    best = k + kOrientations;
                }
            }

            // soft-assign the magnitude to the four neighbouring cells
            float xp = (x + 0.5f) / cell_size - 0.5f;
            float yp = (y + 0.5f) / cell_size - 0.5f;
            int ixp = static_cast<int>(std::floor(xp));
            int iyp = static_cast<int>(std::floor(yp));
            float vx1 = xp - ixp, vx0 = 1.0f - vx1;
            float vy1 = yp - iyp, vy0 = 1.0f - vy1;

            if (ixp >= 0 && iyp >= 0) hist_at(iyp, ixp, best) += vx0 * vy0 * mag;
            if (ixp + 1 < cx && iyp >= 0) hist_at(iyp, ixp + 1, best) += vx1 * vy0 * mag;
            if (ixp >= 0 && iyp + 1 < cy) hist_at(iyp + 1, ixp, best) += vx0 * vy1 * mag;
            if (ixp + 1 < cx && iyp + 1 < cy) hist_at(iyp + 1, ixp + 1, best) += vx1 * vy1 * mag;
        }
    }

    // gradient energy per cell over unsigned orientations
    std::vector<float> energy(static_cast<std::size_t>(cy) * cx, 0.0f);
    for (int r = 0; r < cy; ++r)
        for (int c = 0; c < cx; ++c) {
            float e = 0.0f;
            for (int o = 0; o < kOrientations; ++o) {
                float s = hist_at(r, c, o) + hist_at(r, c, o + kOrientations);
                e += s * s;
            }
            energy[static_cast<std::size_t>(r) * cx + c] = e;
        }

    // 2x2 block energies on a (cy-1)x(cx-1) grid; border cells reuse the
    // nearest block, which keeps every cell instead of cropping the frame
    const int by = std::max(cy - 1, 1);
    const int bx = std::max(cx - 1, 1);
    auto block_norm = [&](int r, int c) {
        r = std::clamp(r, 0, by - 1);
        c = std::clamp(c, 0, bx - 1);
        int r1 = std::min(r + 1, cy - 1), c1 = std::min(c + 1, cx - 1);
        float e = energy[static_cast<std::size_t>(r) * cx + c] +
                  energy[static_cast<std::size_t>(r) * cx + c1] +
                  energy[static_cast<std::size_t>(r1) * cx + c] +
                  energy[static_cast<std::size_t>(r1) * cx + c1];
        return 1.0f / std::sqrt(e + kNormEps);
    };

    ChannelStack out(cx, cy, 31);
    for (int r = 0; r < cy; ++r) {
        for (int c = 0; c < cx; ++c) {
            const std::array<float, 4> norms = {
                block_norm(r - 1, c - 1), block_norm(r - 1, c),
                block_norm(r, c - 1), block_norm(r, c)};

            std::array<float, 4> texture{};
            // 18 contrast-sensitive channels
            for (int o = 0; o < 2 * kOrientations; ++o) {
                float hv = hist_at(r, c, o);
                float acc = 0.0f;
                for (int k = 0; k < 4; ++k) {
                    float t = std::min(hv * norms[k], kClip);
                    acc += t;
                    texture[k] += t;
                }
                out.at(c, r, o) = 0.5f * acc;
            }
            // 9 contrast-insensitive channels
            for (int o = 0; o < kOrientations; ++o) {
                float hv = hist_at(r, c, o) + hist_at(r, c, o + kOrientations);
                float acc = 0.0f;
                for (int k = 0; k < 4; ++k) acc += std::min(hv * norms[k], kClip);
                out.at(c, r, 2 * kOrientations + o) = 0.5f * acc;
            }
            // 4 texture channels, one per normalizer
            for (int k = 0; k < 4; ++k)
                out.at(c, r, 3 * kOrientations + k) = kTextureScale * texture[k];
        }
    }
    return out;
}

ChannelStack extract_raw(const ChannelStack& img, int cell_size, const std::vector<int>& subset) {
    if (img.empty()) throw ContractError("extract_raw: empty image");
    if (cell_size <= 0) throw ContractError("extract_raw: cell_size must be positive");
    const int cx = img.width() / cell_size;
    const int cy = img.height() / cell_size;
    if (cx < 1 || cy < 1)
        throw ContractError("extract_raw: image smaller than one cell");

    std::vector<int> chans = subset;
    if (chans.empty()) {
        chans.resize(img.channels());
        for (int c = 0; c < img.channels(); ++c) chans[c] = c;
    }
    for (int c : chans)
        if (c < 0 || c >= img.channels())
            throw ContractError("extract_raw: channel index " + std::to_string(c) + " out of range");

    ChannelStack out(cx, cy, static_cast<int>(chans.size()));
    const float inv_cell = 1.0f / static_cast<float>(cell_size * cell_size);
    for (std::size_t ci = 0; ci < chans.size(); ++ci) {
        const float* sp = img.plane(chans[ci]);
        double total = 0.0;
        for (int r = 0; r < cy; ++r)
            for (int c = 0; c < cx; ++c) {
                float acc = 0.0f;
                for (int y = r * cell_size; y < (r + 1) * cell_size; ++y)
                    for (int x = c * cell_size; x < (c + 1) * cell_size; ++x)
                        acc += sp[static_cast<std::size_t>(y) * img.width() + x];
                float v = acc * inv_cell;
                out.at(c, r, static_cast<int>(ci)) = v;
                total += v;
            }
        const float mean = static_cast<float>(total / (static_cast<double>(cx) * cy));
        float* op = out.plane(static_cast<int>(ci));
        for (int i = 0; i < cx * cy; ++i) op[i] -= mean;
    }
    return out;
}

ChannelStack concat_channels(const ChannelStack& a, const ChannelStack& b) {
    if (a.width() != b.width() || a.height() != b.height())
        throw ContractError("concat_channels: spatial dims differ (" + std::to_string(a.width()) +
                            "x" + std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                            "x" + std::to_string(b.height()) + ")");
    ChannelStack out(a.width(), a.height(), a.channels() + b.channels());
    std::copy(a.data().begin(), a.data().end(), out.data().begin());
    std::copy(b.data().begin(), b.data().end(),
              out.data().begin() + static_cast<std::ptrdiff_t>(a.data().size()));
    return out;
}

ChannelStack extract_features(const ChannelStack& img, const FeatureConfig& cfg) {
    switch (cfg.kind) {
    case FeatureKind::fhog:
        return extract_fhog(to_gray(img, cfg.channel_subset), cfg.cell_size);
    case FeatureKind::raw_channels:
        return extract_raw(img, cfg.cell_size, cfg.channel_subset);
    case FeatureKind::fhog_plus_raw:
        return concat_channels(extract_fhog(to_gray(img, cfg.channel_subset), cfg.cell_size),
                               extract_raw(img, cfg.cell_size, cfg.channel_subset));
    case FeatureKind::deep_from_file:
        throw ContractError("deep-from-file features are read from FMAP files, not extracted");
    }
    throw ContractError("extract_features: bad kind");
}

namespace {
int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }
} // namespace

Rect project_roi(const Rect& roi_px, int stride, int map_w, int map_h) {
    if (stride <= 0) throw ContractError("project_roi: stride must be positive");
    if (roi_px.w <= 0 || roi_px.h <= 0)
        throw ContractError("project_roi: roi must have positive size");
    if (map_w <= 0 || map_h <= 0) throw ContractError("project_roi: empty feature map");

    int x0 = round_half_up(static_cast<double>(roi_px.x) / stride);
    int x1 = round_half_up(static_cast<double>(roi_px.x + roi_px.w) / stride);
    int y0 = round_half_up(static_cast<double>(roi_px.y) / stride);
    int y1 = round_half_up(static_cast<double>(roi_px.y + roi_px.h) / stride);

    if (x1 <= 0 || y1 <= 0 || x0 >= map_w || y0 >= map_h)
        throw DataError("roi projects entirely outside the feature map");

    x0 = std::clamp(x0, 0, map_w - 1);
    y0 = std::clamp(y0, 0, map_h - 1);
    x1 = std::clamp(x1, x0 + 1, map_w);
    y1 = std::clamp(y1, y0 + 1, map_h);
    return {x0, y0, x1 - x0, y1 - y0};
}

std::vector<float> hann(int n) {
    if (n <= 0) throw ContractError("hann: size must be positive");
    std::vector<float> w(static_cast<std::size_t>(n), 1.0f);
    if (n == 1) return w;
    for (int i = 0; i < n; ++i)
        w[i] = static_cast<float>(0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / (n - 1))));
    return w;
}

ChannelStack hann_window(const ChannelStack& features) {
    if (features.empty()) throw ContractError("hann_window: empty stack");
    const auto wx = hann(features.width());
    const auto wy = hann(features.height());
    ChannelStack out = features;
    for (int c = 0; c < out.channels(); ++c) {
        float* p = out.plane(c);
        for (int y = 0; y < out.height(); ++y)
            for (int x = 0; x < out.width(); ++x)
                p[static_cast<std::size_t>(y) * out.width() + x] *= wy[y] * wx[x];
    }
    return out;
}

} // namespace gridkcf
