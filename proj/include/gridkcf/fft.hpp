#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace gridkcf {

// Dense 2-D spectrum (or any complex h x w grid), row-major.
struct Spectrum {
    int h = 0;
    int w = 0;
    std::vector<std::complex<double>> v;

    Spectrum() = default;
    Spectrum(int height, int width) : h(height), w(width), v(static_cast<std::size_t>(height) * width) {}

    std::complex<double>& at(int r, int c) { return v[static_cast<std::size_t>(r) * w + c]; }
    const std::complex<double>& at(int r, int c) const { return v[static_cast<std::size_t>(r) * w + c]; }
    std::size_t size() const { return v.size(); }
};

// Forward transforms are unnormalized; inverse transforms divide by h*w, so
// ifft2(fft2(x)) == x up to rounding. Plans are cached per shape and shared
// across threads; concurrent execution on distinct buffers is safe.
Spectrum fft2(const std::vector<double>& plane, int h, int w);
Spectrum fft2(const float* plane, int h, int w);
Spectrum fft2(const Spectrum& in);

Spectrum ifft2(const Spectrum& in);
std::vector<double> ifft2_real(const Spectrum& in);

// Number of 2-D transforms executed since process start. Used by tests to pin
// work growth against grid size.
std::uint64_t fft_transform_count();

} // namespace gridkcf
