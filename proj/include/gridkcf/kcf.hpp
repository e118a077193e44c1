#pragma once

#include <vector>

#include "gridkcf/channel_stack.hpp"
#include "gridkcf/fft.hpp"

namespace gridkcf {

enum class Kernel {
    gaussian,
    linear, // diagnostics and the primal-equivalence cross-check
};

struct KcfParams {
    double lambda = 1e-4;
    double kernel_sigma = 0.5;
    double learning_rate = 0.02;
    double output_sigma_factor = 0.1;
    int cell_size = 4; // pixels per feature cell, used to map peaks back to pixels
    Kernel kernel = Kernel::gaussian;

    void validate() const;
};

// Dual-domain ridge regression model. Everything lives at feature-grid
// resolution; template_norm2 caches ||x||^2 (via Parseval, so it stays exact
// under spectral blending in update()).
struct FilterModel {
    int h = 0, w = 0, channels = 0;
    Spectrum alpha_hat;
    std::vector<Spectrum> template_hat;
    double template_norm2 = 0.0;

    bool empty() const { return template_hat.empty(); }
};

struct ResponseMap {
    int h = 0, w = 0;
    std::vector<double> values;
    int peak_row = 0, peak_col = 0;
    double peak_value = 0.0;
    double psr = 0.0;
};

// Cyclically wrapped Gaussian with peak 1 at index (0,0), the zero-shift
// convention the circulant algebra assumes.
std::vector<double> gaussian_target(int h, int w, double output_sigma);

// First row of the kernel matrix between x and z: k[tau] = kappa(x, shift(z, tau))
// evaluated for every 2-D cyclic shift via the Fourier cross-correlation trick.
// The Gaussian kernel normalizes the squared distance by the total element
// count (h*w*C) so kernel_sigma stays scale-free across feature sizes, and
// clamps it at >= 0 before exponentiating.
std::vector<double> kernel_correlation(const ChannelStack& x, const ChannelStack& z,
                                       double kernel_sigma, Kernel kernel = Kernel::gaussian);

FilterModel train(const ChannelStack& features, const KcfParams& params);

ResponseMap detect(const FilterModel& model, const ChannelStack& z, const KcfParams& params);

// Peak-to-sidelobe ratio with an 11x11 exclusion window around the peak
// (clipped at map borders). Population statistics; std clamped at 1e-6;
// empty sidelobe scores 0.
double psr(const std::vector<double>& response, int h, int w);

// Convex blend (1-beta)*model + beta*new_model of both the dual coefficients
// and the template spectra. beta 0 and 1 reproduce the inputs bitwise.
FilterModel update(const FilterModel& model, const FilterModel& new_model, double beta);

// Cyclic index -> signed displacement: indices above dim/2 wrap negative.
inline int wrapped_shift(int index, int dim) {
    return index > dim / 2 ? index - dim : index;
}

} // namespace gridkcf
