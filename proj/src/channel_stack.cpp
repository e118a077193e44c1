#include "gridkcf/channel_stack.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gridkcf/errors.hpp"

namespace gridkcf {

ChannelStack::ChannelStack(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels),
      plane_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    if (width < 0 || height < 0 || channels < 0)
        throw ContractError("ChannelStack: negative dimensions");
    data_.assign(plane_ * static_cast<std::size_t>(channels), 0.0f);
}

bool ChannelStack::all_finite() const {
    for (float v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

double ChannelStack::squared_norm() const {
    double acc = 0.0;
    for (float v : data_) acc += static_cast<double>(v) * static_cast<double>(v);
    return acc;
}

ChannelStack crop(const ChannelStack& src, const Rect& rect) {
    if (src.empty()) throw ContractError("crop: empty source stack");
    if (rect.w <= 0 || rect.h <= 0)
        throw ContractError("crop: rect must have positive size");

    ChannelStack out(rect.w, rect.h, src.channels());
    for (int c = 0; c < src.channels(); ++c) {
        const float* sp = src.plane(c);
        float* op = out.plane(c);
        for (int y = 0; y < rect.h; ++y) {
            int sy = std::clamp(rect.y + y, 0, src.height() - 1);
            const float* srow = sp + static_cast<std::size_t>(sy) * src.width();
            float* orow = op + static_cast<std::size_t>(y) * rect.w;
            for (int x = 0; x < rect.w; ++x) {
                int sx = std::clamp(rect.x + x, 0, src.width() - 1);
                orow[x] = srow[sx];
            }
        }
    }
    return out;
}

ChannelStack to_gray(const ChannelStack& src, const std::vector<int>& subset) {
    if (src.empty()) throw ContractError("to_gray: empty source stack");
    std::vector<int> chans = subset;
    if (chans.empty()) {
        chans.resize(src.channels());
        for (int c = 0; c < src.channels(); ++c) chans[c] = c;
    }
    for (int c : chans)
        if (c < 0 || c >= src.channels())
            throw ContractError("to_gray: channel index " + std::to_string(c) + " out of range");

    ChannelStack out(src.width(), src.height(), 1);
    const std::size_t n = static_cast<std::size_t>(src.width()) * src.height();
    float* op = out.plane(0);

    if (chans.size() == 1) {
        const float* sp = src.plane(chans[0]);
        std::copy(sp, sp + n, op);
        return out;
    }

    if (chans.size() == 3) {
        // R,G,B luminance
        const float* r = src.plane(chans[0]);
        const float* g = src.plane(chans[1]);
        const float* b = src.plane(chans[2]);
        for (std::size_t i = 0; i < n; ++i)
            op[i] = 0.299f * r[i] + 0.587f * g[i] + 0.114f * b[i];
        return out;
    }

    const float inv = 1.0f / static_cast<float>(chans.size());
    for (int c : chans) {
        const float* sp = src.plane(c);
        for (std::size_t i = 0; i < n; ++i) op[i] += sp[i];
    }
    for (std::size_t i = 0; i < n; ++i) op[i] *= inv;
    return out;
}

} // namespace gridkcf
