#pragma once

#include <cstddef>
#include <vector>

namespace gridkcf {

struct Point2d {
    double x = 0.0;
    double y = 0.0;
};

// Integer pixel rectangle, [x, x+w) x [y, y+h).
struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    bool operator==(const Rect&) const = default;
    double cx() const { return x + w / 2.0; }
    double cy() const { return y + h / 2.0; }
    bool contains(const Rect& r) const {
        return r.x >= x && r.y >= y && r.x + r.w <= x + w && r.y + r.h <= y + h;
    }
};

// Multi-channel raster. Planes are channel-major, each plane row-major, so
// plane c starts at data[c*width*height]. Values are f32 throughout; frames
// land in [0,1] but feature stacks can hold anything finite.
class ChannelStack {
public:
    ChannelStack() = default;
    ChannelStack(int width, int height, int channels);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    bool empty() const { return data_.empty(); }
    std::size_t size() const { return data_.size(); }

    float& at(int x, int y, int c) {
        return data_[static_cast<std::size_t>(c) * plane_ + static_cast<std::size_t>(y) * width_ + x];
    }
    float at(int x, int y, int c) const {
        return data_[static_cast<std::size_t>(c) * plane_ + static_cast<std::size_t>(y) * width_ + x];
    }

    float* plane(int c) { return data_.data() + static_cast<std::size_t>(c) * plane_; }
    const float* plane(int c) const { return data_.data() + static_cast<std::size_t>(c) * plane_; }

    std::vector<float>& data() { return data_; }
    const std::vector<float>& data() const { return data_; }

    // true when every sample is finite
    bool all_finite() const;

    // sum over all channels of squared values, in double
    double squared_norm() const;

private:
    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::size_t plane_ = 0;
    std::vector<float> data_;
};

// Crop with replicate-edge padding: out-of-bounds samples take the value of
// the nearest in-bounds pixel. rect.w/h must be positive, src non-empty.
ChannelStack crop(const ChannelStack& src, const Rect& rect);

// Single-channel view helpers used by features and registration. subset picks
// source channels; empty subset means all of them. A 3-element subset is
// treated as R,G,B and reduced with the usual luminance weights, anything else
// is a plain mean.
ChannelStack to_gray(const ChannelStack& src, const std::vector<int>& subset = {});

} // namespace gridkcf
