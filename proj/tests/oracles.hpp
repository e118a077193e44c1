#pragma once

// Slow reference implementations the unit and acceptance tests pin the fast
// paths against. Everything here works by direct summation over explicit
// cyclic shifts (plus a naive DFT and a dense Eigen solve), so a sign or
// orientation bug in the spectral code cannot cancel against itself.

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "gridkcf/channel_stack.hpp"
#include "gridkcf/kcf.hpp"
#include "gridkcf/rng.hpp"

namespace oracle {

// Content moves by (dy, dx): out(x, y, c) = in(x - dx, y - dy, c), cyclic.
inline gridkcf::ChannelStack shift_stack(const gridkcf::ChannelStack& in, int dy, int dx) {
    const int w = in.width(), h = in.height();
    gridkcf::ChannelStack out(w, h, in.channels());
    for (int c = 0; c < in.channels(); ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out.at(x, y, c) = in.at(((x - dx) % w + w) % w, ((y - dy) % h + h) % h, c);
    return out;
}

inline gridkcf::ChannelStack random_stack(gridkcf::Rng& rng, int w, int h, int c,
                                          double lo = -0.5, double hi = 0.5) {
    gridkcf::ChannelStack out(w, h, c);
    for (auto& v : out.data()) v = static_cast<float>(rng.uniform(lo, hi));
    return out;
}

inline double dot(const gridkcf::ChannelStack& a, const gridkcf::ChannelStack& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += static_cast<double>(a.data()[i]) * static_cast<double>(b.data()[i]);
    return acc;
}

// k[dy*w + dx] = kappa(shift(x, (dy,dx)), z) by direct summation.
inline std::vector<double> kernel_direct(const gridkcf::ChannelStack& x,
                                         const gridkcf::ChannelStack& z, double sigma,
                                         gridkcf::Kernel kernel = gridkcf::Kernel::gaussian) {
    const int w = x.width(), h = x.height();
    std::vector<double> k(static_cast<std::size_t>(h) * w);
    const double nx = dot(x, x), nz = dot(z, z);
    const double numel = static_cast<double>(h) * w * x.channels();
    for (int dy = 0; dy < h; ++dy)
        for (int dx = 0; dx < w; ++dx) {
            const double corr = dot(shift_stack(x, dy, dx), z);
            double& out = k[static_cast<std::size_t>(dy) * w + dx];
            if (kernel == gridkcf::Kernel::linear) {
                out = corr;
            } else {
                const double d = std::max(0.0, nx + nz - 2.0 * corr);
                out = std::exp(-d / (sigma * sigma * numel));
            }
        }
    return k;
}

// Same wrapped-Gaussian regression target train() uses, written from the
// closed form rather than shared code.
inline std::vector<double> target_direct(int h, int w, double output_sigma) {
    std::vector<double> y(static_cast<std::size_t>(h) * w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            const double dy = r > h / 2 ? r - h : r;
            const double dx = c > w / 2 ? c - w : c;
            y[static_cast<std::size_t>(r) * w + c] =
                std::exp(-(dy * dy + dx * dx) / (2.0 * output_sigma * output_sigma));
        }
    return y;
}

// Kernel ridge regression over all h*w cyclic shifts of x, solved densely:
// (K + lambda I) alpha = y with K[i][j] = kappa(shift(x,i), shift(x,j)).
inline std::vector<double> dense_alpha(const gridkcf::ChannelStack& x,
                                       const gridkcf::KcfParams& p) {
    const int w = x.width(), h = x.height(), n = h * w;
    const auto kxx = kernel_direct(x, x, p.kernel_sigma, p.kernel);
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i) {
        const int r1 = i / w, c1 = i % w;
        for (int j = 0; j < n; ++j) {
            const int r2 = j / w, c2 = j % w;
            K(i, j) = kxx[static_cast<std::size_t>(((r1 - r2) % h + h) % h) * w +
                          ((c1 - c2) % w + w) % w];
        }
    }
    K.diagonal().array() += p.lambda;
    const double sigma = p.output_sigma_factor * std::sqrt(static_cast<double>(n));
    const auto y = target_direct(h, w, sigma);
    Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
    Eigen::VectorXd a = K.ldlt().solve(yv);
    return {a.data(), a.data() + n};
}

// Detection scores from a spatial coefficient vector: the filter trained on x
// responds to z with f[tau] = sum_i alpha[i] * kappa(shift(x, tau - i), z).
inline std::vector<double> dense_response(const std::vector<double>& alpha,
                                          const gridkcf::ChannelStack& x,
                                          const gridkcf::ChannelStack& z,
                                          const gridkcf::KcfParams& p) {
    const int w = x.width(), h = x.height();
    const auto kxz = kernel_direct(x, z, p.kernel_sigma, p.kernel);
    std::vector<double> f(static_cast<std::size_t>(h) * w, 0.0);
    for (int tr = 0; tr < h; ++tr)
        for (int tc = 0; tc < w; ++tc) {
            double acc = 0.0;
            for (int ir = 0; ir < h; ++ir)
                for (int ic = 0; ic < w; ++ic)
                    acc += alpha[static_cast<std::size_t>(ir) * w + ic] *
                           kxz[static_cast<std::size_t>(((tr - ir) % h + h) % h) * w +
                               ((tc - ic) % w + w) % w];
            f[static_cast<std::size_t>(tr) * w + tc] = acc;
        }
    return f;
}

// O(n^2) DFT so spectra can be checked without touching the FFT under test.
inline std::vector<std::complex<double>> naive_dft2(const std::vector<double>& x, int h, int w) {
    constexpr double tau = 6.283185307179586476925287;
    std::vector<std::complex<double>> X(static_cast<std::size_t>(h) * w);
    for (int k = 0; k < h; ++k)
        for (int l = 0; l < w; ++l) {
            std::complex<double> acc = 0.0;
            for (int r = 0; r < h; ++r)
                for (int c = 0; c < w; ++c) {
                    const double ang = -tau * (static_cast<double>(k) * r / h +
                                               static_cast<double>(l) * c / w);
                    acc += x[static_cast<std::size_t>(r) * w + c] *
                           std::complex<double>(std::cos(ang), std::sin(ang));
                }
            X[static_cast<std::size_t>(k) * w + l] = acc;
        }
    return X;
}

inline std::vector<std::complex<double>> naive_idft2(const std::vector<std::complex<double>>& X,
                                                     int h, int w) {
    constexpr double tau = 6.283185307179586476925287;
    std::vector<std::complex<double>> x(static_cast<std::size_t>(h) * w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            std::complex<double> acc = 0.0;
            for (int k = 0; k < h; ++k)
                for (int l = 0; l < w; ++l) {
                    const double ang = tau * (static_cast<double>(k) * r / h +
                                              static_cast<double>(l) * c / w);
                    acc += X[static_cast<std::size_t>(k) * w + l] *
                           std::complex<double>(std::cos(ang), std::sin(ang));
                }
            x[static_cast<std::size_t>(r) * w + c] = acc / static_cast<double>(h * w);
        }
    return x;
}

// Peak-to-sidelobe ratio by plain enumeration: peak, then mean/std over all
// cells outside the 11x11 box around it (box clipped at the borders).
inline double psr_direct(const std::vector<double>& r, int h, int w) {
    int pr = 0, pc = 0;
    double peak = r[0];
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
            if (r[static_cast<std::size_t>(i) * w + j] > peak) {
                peak = r[static_cast<std::size_t>(i) * w + j];
                pr = i;
                pc = j;
            }
    double sum = 0.0, sum2 = 0.0;
    std::size_t n = 0;
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            if (std::abs(i - pr) <= 5 && std::abs(j - pc) <= 5) continue;
            const double v = r[static_cast<std::size_t>(i) * w + j];
            sum += v;
            sum2 += v * v;
            ++n;
        }
    if (n == 0) return 0.0;
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(0.0, sum2 / static_cast<double>(n) - mean * mean);
    return (peak - mean) / std::max(std::sqrt(var), 1e-6);
}

inline double rel_l2(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace oracle
