#include "gridkcf/kcf.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "gridkcf/errors.hpp"

namespace gridkcf {

void KcfParams::validate() const {
    if (lambda <= 0.0) throw ConfigError("kcf: lambda must be positive");
    if (kernel_sigma <= 0.0) throw ConfigError("kcf: kernel_sigma must be positive");
    if (learning_rate < 0.0 || learning_rate > 1.0)
        throw ConfigError("kcf: learning_rate must be in [0,1]");
    if (output_sigma_factor <= 0.0) throw ConfigError("kcf: output_sigma_factor must be positive");
    if (cell_size <= 0) throw ConfigError("kcf: cell_size must be positive");
}

std::vector<double> gaussian_target(int h, int w, double output_sigma) {
    if (h < 1 || w < 1) throw ContractError("gaussian_target: dims must be >= 1");
    if (output_sigma <= 0.0) throw ContractError("gaussian_target: sigma must be positive");
    std::vector<double> y(static_cast<std::size_t>(h) * w);
    const double inv = 1.0 / (2.0 * output_sigma * output_sigma);
    for (int r = 0; r < h; ++r) {
        const double dy = wrapped_shift(r, h);
        for (int c = 0; c < w; ++c) {
            const double dx = wrapped_shift(c, w);
            y[static_cast<std::size_t>(r) * w + c] = std::exp(-(dy * dy + dx * dx) * inv);
        }
    }
    return y;
}

namespace {

std::vector<Spectrum> stack_spectra(const ChannelStack& s) {
    std::vector<Spectrum> out;
    out.reserve(static_cast<std::size_t>(s.channels()));
    for (int c = 0; c < s.channels(); ++c) out.push_back(fft2(s.plane(c), s.height(), s.width()));
    return out;
}

// ||x||^2 recovered from the spectra (Parseval), so it stays consistent when
// update() blends templates in the frequency domain.
double parseval_norm2(const std::vector<Spectrum>& spectra) {
    double acc = 0.0;
    for (const auto& s : spectra)
        for (const auto& z : s.v) acc += std::norm(z);
    return acc / (static_cast<double>(spectra[0].h) * spectra[0].w);
}

// k[tau] = kappa(shift(x, tau), z) for all 2-D shifts. The cross-correlation
// spectrum is sum_c zhat_c . conj(xhat_c).
std::vector<double> kernel_from_spectra(const std::vector<Spectrum>& xhat, double x_norm2,
                                        const std::vector<Spectrum>& zhat, double z_norm2,
                                        double sigma, Kernel kernel) {
    const int h = xhat[0].h, w = xhat[0].w;
    Spectrum cross(h, w);
    for (std::size_t c = 0; c < xhat.size(); ++c)
        for (std::size_t i = 0; i < cross.v.size(); ++i)
            cross.v[i] += zhat[c].v[i] * std::conj(xhat[c].v[i]);
    std::vector<double> corr = ifft2_real(cross);

    if (kernel == Kernel::linear) return corr;

    const double numel = static_cast<double>(h) * w * static_cast<double>(xhat.size());
    const double scale = 1.0 / (sigma * sigma * numel);
    for (double& v : corr) {
        double d = x_norm2 + z_norm2 - 2.0 * v;
        if (d < 0.0) d = 0.0; // cancellation guard, kappa <= 1 by Cauchy-Schwarz
        v = std::exp(-d * scale);
    }
    return corr;
}

void check_same_shape(const ChannelStack& a, const ChannelStack& b, const char* who) {
    if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels())
        throw ContractError(std::string(who) + ": shape mismatch (" + std::to_string(a.width()) +
                            "x" + std::to_string(a.height()) + "x" + std::to_string(a.channels()) +
                            " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()) +
                            "x" + std::to_string(b.channels()) + ")");
}

std::pair<int, int> argmax_rc(const std::vector<double>& v, int h, int w) {
    int br = 0, bc = 0;
    double best = v[0];
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            double x = v[static_cast<std::size_t>(r) * w + c];
            if (x > best) {
                best = x;
                br = r;
                bc = c;
            }
        }
    return {br, bc};
}

// Cyclic rotation putting the zero-shift bin at (h/2, w/2). The response is
// periodic, so a peak near (0,0) carries a main lobe that wraps into all four
// corners; centering makes the lobe contiguous, which the border-clipped
// sidelobe exclusion in psr() needs to cut it out cleanly.
std::vector<double> centered_copy(const std::vector<double>& v, int h, int w) {
    std::vector<double> out(v.size());
    const int rh = h / 2, rw = w / 2;
    for (int r = 0; r < h; ++r) {
        const int rr = (r + rh) % h;
        for (int c = 0; c < w; ++c)
            out[static_cast<std::size_t>(rr) * w + (c + rw) % w] =
                v[static_cast<std::size_t>(r) * w + c];
    }
    return out;
}

} // namespace

std::vector<double> kernel_correlation(const ChannelStack& x, const ChannelStack& z,
                                       double kernel_sigma, Kernel kernel) {
    if (x.empty()) throw ContractError("kernel_correlation: empty input");
    check_same_shape(x, z, "kernel_correlation");
    if (kernel_sigma <= 0.0) throw ContractError("kernel_correlation: sigma must be positive");
    auto xhat = stack_spectra(x);
    auto zhat = stack_spectra(z);
    return kernel_from_spectra(xhat, parseval_norm2(xhat), zhat, parseval_norm2(zhat),
                               kernel_sigma, kernel);
}

FilterModel train(const ChannelStack& features, const KcfParams& params) {
    params.validate();
    if (features.empty()) throw ContractError("train: empty features");

    FilterModel m;
    m.h = features.height();
    m.w = features.width();
    m.channels = features.channels();
    m.template_hat = stack_spectra(features);
    m.template_norm2 = parseval_norm2(m.template_hat);

    auto kxx = kernel_from_spectra(m.template_hat, m.template_norm2, m.template_hat,
                                   m.template_norm2, params.kernel_sigma, params.kernel);
    Spectrum khat = fft2(kxx, m.h, m.w);

    const double output_sigma =
        params.output_sigma_factor * std::sqrt(static_cast<double>(m.h) * m.w);
    Spectrum yhat = fft2(gaussian_target(m.h, m.w, output_sigma), m.h, m.w);

    m.alpha_hat = Spectrum(m.h, m.w);
    for (std::size_t i = 0; i < m.alpha_hat.v.size(); ++i)
        m.alpha_hat.v[i] = yhat.v[i] / (khat.v[i] + params.lambda);
    return m;
}

ResponseMap detect(const FilterModel& model, const ChannelStack& z, const KcfParams& params) {
    params.validate();
    if (model.empty()) throw ContractError("detect: model is untrained");
    if (z.width() != model.w || z.height() != model.h || z.channels() != model.channels)
        throw ContractError("detect: shape mismatch (model " + std::to_string(model.w) + "x" +
                            std::to_string(model.h) + "x" + std::to_string(model.channels) +
                            ", z " + std::to_string(z.width()) + "x" + std::to_string(z.height()) +
                            "x" + std::to_string(z.channels()) + ")");

    auto zhat = stack_spectra(z);
    auto kxz = kernel_from_spectra(model.template_hat, model.template_norm2, zhat,
                                   parseval_norm2(zhat), params.kernel_sigma, params.kernel);
    Spectrum khat = fft2(kxz, model.h, model.w);

    Spectrum prod(model.h, model.w);
    for (std::size_t i = 0; i < prod.v.size(); ++i) prod.v[i] = khat.v[i] * model.alpha_hat.v[i];

    ResponseMap r;
    r.h = model.h;
    r.w = model.w;
    r.values = ifft2_real(prod);
    auto [pr, pc] = argmax_rc(r.values, r.h, r.w);
    r.peak_row = pr;
    r.peak_col = pc;
    r.peak_value = r.values[static_cast<std::size_t>(pr) * r.w + pc];
    r.psr = psr(centered_copy(r.values, r.h, r.w), r.h, r.w);
    return r;
}

double psr(const std::vector<double>& response, int h, int w) {
    if (h < 1 || w < 1 || response.size() != static_cast<std::size_t>(h) * w)
        throw ContractError("psr: bad response dimensions");

    auto [pr, pc] = argmax_rc(response, h, w);
    const double peak = response[static_cast<std::size_t>(pr) * w + pc];

    // 11x11 exclusion window, clipped at the borders
    const int r0 = std::max(pr - 5, 0), r1 = std::min(pr + 5, h - 1);
    const int c0 = std::max(pc - 5, 0), c1 = std::min(pc + 5, w - 1);

    double sum = 0.0;
    std::size_t count = 0;
    double lo = peak, hi = peak;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            if (r >= r0 && r <= r1 && c >= c0 && c <= c1) continue;
            const double v = response[static_cast<std::size_t>(r) * w + c];
            sum += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            ++count;
        }
    if (count == 0) return 0.0;
    // a response with no variation at all carries no evidence; report it as
    // exactly zero instead of whatever rounding the mean picked up
    if (lo == hi) return 0.0;

    const double mean = sum / static_cast<double>(count);
    double var = 0.0;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            if (r >= r0 && r <= r1 && c >= c0 && c <= c1) continue;
            const double d = response[static_cast<std::size_t>(r) * w + c] - mean;
            var += d * d;
        }
    const double sd = std::sqrt(var / static_cast<double>(count));
    return (peak - mean) / std::max(sd, 1e-6);
}

FilterModel update(const FilterModel& model, const FilterModel& new_model, double beta) {
    if (beta < 0.0 || beta > 1.0) throw ContractError("update: beta outside [0,1]");
    if (model.h != new_model.h || model.w != new_model.w || model.channels != new_model.channels)
        throw ContractError("update: model shapes differ");
    // exact endpoints, so beta=0 is bitwise identity (blending would flip -0.0)
    if (beta == 0.0) return model;
    if (beta == 1.0) return new_model;

    FilterModel out = model;
    const double keep = 1.0 - beta;
    for (std::size_t i = 0; i < out.alpha_hat.v.size(); ++i)
        out.alpha_hat.v[i] = keep * model.alpha_hat.v[i] + beta * new_model.alpha_hat.v[i];
    for (std::size_t c = 0; c < out.template_hat.size(); ++c)
        for (std::size_t i = 0; i < out.template_hat[c].v.size(); ++i)
            out.template_hat[c].v[i] =
                keep * model.template_hat[c].v[i] + beta * new_model.template_hat[c].v[i];

    double acc = 0.0;
    for (const auto& s : out.template_hat)
        for (const auto& z : s.v) acc += std::norm(z);
    out.template_norm2 = acc / (static_cast<double>(out.h) * out.w);
    return out;
}

} // namespace gridkcf
