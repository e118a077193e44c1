#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "gridkcf/errors.hpp"
#include "gridkcf/fft.hpp"
#include "gridkcf/kcf.hpp"
#include "gridkcf/rng.hpp"
#include "oracles.hpp"

using namespace gridkcf;

namespace {

// relative L2 distance between a complex spectrum and a reference vector
double spec_rel_err(const Spectrum& got, const std::vector<std::complex<double>>& ref) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        num += std::norm(got.v[i] - ref[i]);
        den += std::norm(ref[i]);
    }
    return std::sqrt(num / den);
}

} // namespace

TEST_SUITE("kcf") {

TEST_CASE("fft round-trips and keeps Parseval energy") {
    Rng rng(7);
    const int h = 6, w = 9;
    std::vector<double> x(static_cast<std::size_t>(h) * w);
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);

    auto X = fft2(x, h, w);
    auto back = ifft2_real(X);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-12));

    // unnormalized forward: sum |X|^2 = n * sum x^2
    double ex = 0.0, eX = 0.0;
    for (double v : x) ex += v * v;
    for (const auto& z : X.v) eX += std::norm(z);
    CHECK(eX == doctest::Approx(ex * h * w).epsilon(1e-12));

    // against the naive transform
    auto ref = oracle::naive_dft2(x, h, w);
    CHECK(spec_rel_err(X, ref) < 1e-12);
}

TEST_CASE("gaussian_target closed form and wrapping") {
    auto y = gaussian_target(1, 1, 0.5);
    CHECK(y.size() == 1);
    CHECK(y[0] == doctest::Approx(1.0));

    y = gaussian_target(4, 4, 0.5);
    CHECK(y[0] == doctest::Approx(1.0));
    CHECK(y[2 * 4 + 2] == doctest::Approx(std::exp(-16.0)).epsilon(1e-12));

    // wrapped symmetry: one step forward equals one step back
    auto t = gaussian_target(8, 8, 1.3);
    CHECK(t[1] == doctest::Approx(t[7]).epsilon(1e-12));
    CHECK(t[1 * 8] == doctest::Approx(t[7 * 8]).epsilon(1e-12));

    // total mass against the independent closed-form evaluation
    auto ref = oracle::target_direct(8, 8, 1.3);
    double sum = 0.0, ref_sum = 0.0;
    for (double v : t) sum += v;
    for (double v : ref) ref_sum += v;
    CHECK(sum == doctest::Approx(ref_sum).epsilon(1e-12));
    CHECK(oracle::max_abs_diff(t, ref) < 1e-12);

    CHECK_THROWS_AS(gaussian_target(0, 4, 0.5), ContractError);
    CHECK_THROWS_AS(gaussian_target(4, 4, 0.0), ContractError);
}

TEST_CASE("kernel_correlation of a stack with itself peaks at 1 at zero shift") {
    Rng rng(11);
    auto x = oracle::random_stack(rng, 8, 6, 3);
    auto k = kernel_correlation(x, x, 0.5);
    REQUIRE(k.size() == 48);
    CHECK(k[0] == doctest::Approx(1.0).epsilon(1e-12));
    for (double v : k) CHECK(v <= 1.0 + 1e-12);
}

TEST_CASE("kernel_correlation of zero stacks is all ones") {
    ChannelStack x(5, 4, 2), z(5, 4, 2);
    auto k = kernel_correlation(x, z, 0.5);
    for (double v : k) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kernel_correlation matches brute-force shift enumeration") {
    Rng rng(3);
    auto x = oracle::random_stack(rng, 4, 4, 2);
    auto z = oracle::random_stack(rng, 4, 4, 2);

    auto k = kernel_correlation(x, z, 0.5);
    auto ref = oracle::kernel_direct(x, z, 0.5);
    CHECK(oracle::max_abs_diff(k, ref) < 1e-9);

    auto kl = kernel_correlation(x, z, 0.5, Kernel::linear);
    auto refl = oracle::kernel_direct(x, z, 0.5, Kernel::linear);
    CHECK(oracle::max_abs_diff(kl, refl) < 1e-9);
}

TEST_CASE("kernel_correlation peaks at the shift relating the two stacks") {
    Rng rng(19);
    auto x = oracle::random_stack(rng, 8, 8, 2);
    auto z = oracle::shift_stack(x, 3, 5);
    auto k = kernel_correlation(x, z, 0.5);
    std::size_t best = 0;
    for (std::size_t i = 1; i < k.size(); ++i)
        if (k[i] > k[best]) best = i;
    CHECK(best / 8 == 3);
    CHECK(best % 8 == 5);
}

TEST_CASE("kernel_correlation rejects mismatched or empty inputs") {
    Rng rng(1);
    auto x = oracle::random_stack(rng, 4, 4, 2);
    auto z = oracle::random_stack(rng, 4, 4, 3);
    CHECK_THROWS_AS(kernel_correlation(x, z, 0.5), ContractError);
    CHECK_THROWS_AS(kernel_correlation(ChannelStack(), ChannelStack(), 0.5), ContractError);
    CHECK_THROWS_AS(kernel_correlation(x, x, 0.0), ContractError);
}

TEST_CASE("train on a scalar feature gives alpha_hat = 1/(1+lambda)") {
    ChannelStack f(1, 1, 1);
    f.at(0, 0, 0) = 0.3f;
    KcfParams p;
    p.lambda = 1e-4;
    auto m = train(f, p);
    REQUIRE(m.alpha_hat.size() == 1);
    CHECK(m.alpha_hat.v[0].real() == doctest::Approx(1.0 / (1.0 + p.lambda)).epsilon(1e-12));
    CHECK(m.alpha_hat.v[0].imag() == doctest::Approx(0.0));

    // linear kernel: k^xx = v^2, so alpha_hat = 1/(v^2 + lambda). Square the
    // float-rounded value the stack actually stores.
    p.kernel = Kernel::linear;
    auto ml = train(f, p);
    const double stored = f.at(0, 0, 0);
    CHECK(ml.alpha_hat.v[0].real() ==
          doctest::Approx(1.0 / (stored * stored + p.lambda)).epsilon(1e-9));
}

TEST_CASE("train matches the dense kernel ridge solve") {
    KcfParams p;
    for (int channels : {1, 3}) {
        Rng rng(23 + channels);
        auto x = oracle::random_stack(rng, 8, 8, channels);
        auto m = train(x, p);
        auto ref = oracle::naive_dft2(oracle::dense_alpha(x, p), 8, 8);
        CHECK(spec_rel_err(m.alpha_hat, ref) < 1e-6);
    }
}

TEST_CASE("linear-kernel detection equals the primal filter response") {
    // single channel: the dual response must reduce to the classic primal
    // correlation filter r = IDFT(Z . conj(X) . Y / (|X|^2 + lambda))
    Rng rng(5);
    auto x = oracle::random_stack(rng, 8, 8, 1);
    auto z = oracle::random_stack(rng, 8, 8, 1);
    KcfParams p;
    p.kernel = Kernel::linear;

    auto m = train(x, p);
    auto r = detect(m, z, p);

    std::vector<double> xs(x.data().begin(), x.data().end());
    std::vector<double> zs(z.data().begin(), z.data().end());
    auto X = oracle::naive_dft2(xs, 8, 8);
    auto Z = oracle::naive_dft2(zs, 8, 8);
    auto Y = oracle::naive_dft2(
        oracle::target_direct(8, 8, p.output_sigma_factor * 8.0), 8, 8);
    std::vector<std::complex<double>> R(64);
    for (int i = 0; i < 64; ++i)
        R[i] = Z[i] * std::conj(X[i]) * Y[i] / (std::norm(X[i]) + p.lambda);
    auto ref_c = oracle::naive_idft2(R, 8, 8);
    std::vector<double> ref(64);
    for (int i = 0; i < 64; ++i) ref[i] = ref_c[i].real();

    CHECK(oracle::rel_l2(r.values, ref) < 1e-5);
}

TEST_CASE("detect peaks at zero shift on the training features") {
    Rng rng(31);
    auto x = oracle::random_stack(rng, 8, 8, 2);
    KcfParams p;
    auto m = train(x, p);
    auto r = detect(m, x, p);
    CHECK(r.peak_row == 0);
    CHECK(r.peak_col == 0);
    CHECK(r.peak_value == r.values[0]);
}

TEST_CASE("detect is shift-equivariant over every cyclic shift") {
    Rng rng(37);
    auto x = oracle::random_stack(rng, 8, 8, 2);
    KcfParams p;
    auto m = train(x, p);
    for (int dy = 0; dy < 8; ++dy)
        for (int dx = 0; dx < 8; ++dx) {
            auto r = detect(m, oracle::shift_stack(x, dy, dx), p);
            CHECK(r.peak_row == dy);
            CHECK(r.peak_col == dx);
        }
}

TEST_CASE("detect matches the dense regression-function evaluation") {
    Rng rng(41);
    auto x = oracle::random_stack(rng, 8, 8, 2);
    auto z = oracle::shift_stack(x, 2, 3);
    // perturb z so the oracle is exercised off the exact-shift manifold
    for (auto& v : z.data()) v += static_cast<float>(rng.uniform(-0.05, 0.05));

    KcfParams p;
    auto m = train(x, p);
    auto r = detect(m, z, p);
    auto ref = oracle::dense_response(oracle::dense_alpha(x, p), x, z, p);
    CHECK(oracle::rel_l2(r.values, ref) < 1e-6);
    CHECK(r.h == 8);
    CHECK(r.w == 8);
}

TEST_CASE("detect rejects mismatched inputs") {
    Rng rng(2);
    auto x = oracle::random_stack(rng, 8, 8, 2);
    auto bad = oracle::random_stack(rng, 8, 6, 2);
    KcfParams p;
    auto m = train(x, p);
    CHECK_THROWS_AS(detect(m, bad, p), ContractError);
}

TEST_CASE("psr of a constant response is zero") {
    std::vector<double> r(9 * 9, 0.25);
    CHECK(psr(r, 9, 9) == doctest::Approx(0.0));
}

TEST_CASE("psr matches the enumerated 15x15 sidelobe example") {
    // 11x11 exclusion around the center leaves 104 sidelobe cells; split them
    // evenly between 1.0 and 3.0 so mean = 2 and std = 1, with a peak of 10
    std::vector<double> r(15 * 15, 2.0);
    r[7 * 15 + 7] = 10.0;
    int flip = 0;
    for (int i = 0; i < 15; ++i)
        for (int j = 0; j < 15; ++j) {
            if (std::abs(i - 7) <= 5 && std::abs(j - 7) <= 5) continue;
            r[static_cast<std::size_t>(i) * 15 + j] = (flip++ % 2 == 0) ? 1.0 : 3.0;
        }
    REQUIRE(flip == 104);
    CHECK(psr(r, 15, 15) == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(oracle::psr_direct(r, 15, 15) == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("psr is invariant under positive affine rescaling") {
    Rng rng(13);
    std::vector<double> r(12 * 10);
    for (auto& v : r) v = rng.uniform(0.0, 1.0);
    r[5 * 10 + 4] = 3.0;

    std::vector<double> s(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) s[i] = 2.5 * r[i] - 1.3;

    CHECK(psr(s, 12, 10) == doctest::Approx(psr(r, 12, 10)).epsilon(1e-9));
    CHECK(psr(r, 12, 10) == doctest::Approx(oracle::psr_direct(r, 12, 10)).epsilon(1e-9));
}

TEST_CASE("psr window clips at borders instead of wrapping") {
    // peak in a corner: the exclusion box covers only 6x6 cells there, and the
    // direct enumeration must agree on exactly which cells are sidelobe
    Rng rng(17);
    std::vector<double> r(13 * 13);
    for (auto& v : r) v = rng.uniform(0.0, 0.5);
    r[0] = 5.0;
    CHECK(psr(r, 13, 13) == doctest::Approx(oracle::psr_direct(r, 13, 13)).epsilon(1e-9));
}

TEST_CASE("psr returns 0 when everything is excluded") {
    std::vector<double> r(3 * 3, 1.0);
    r[4] = 2.0;
    CHECK(psr(r, 3, 3) == doctest::Approx(0.0));
}

TEST_CASE("update blends coefficients and templates convexly") {
    Rng rng(43);
    auto a = oracle::random_stack(rng, 6, 6, 2);
    auto b = oracle::random_stack(rng, 6, 6, 2);
    KcfParams p;
    auto ma = train(a, p);
    auto mb = train(b, p);

    auto same = update(ma, mb, 0.0);
    CHECK(same.alpha_hat.v == ma.alpha_hat.v);
    CHECK(same.template_hat[0].v == ma.template_hat[0].v);

    auto swapped = update(ma, mb, 1.0);
    CHECK(swapped.alpha_hat.v == mb.alpha_hat.v);
    CHECK(swapped.template_hat[1].v == mb.template_hat[1].v);

    auto mixed = update(ma, mb, 0.02);
    for (std::size_t i = 0; i < mixed.alpha_hat.size(); ++i) {
        auto want = 0.98 * ma.alpha_hat.v[i] + 0.02 * mb.alpha_hat.v[i];
        CHECK(std::abs(mixed.alpha_hat.v[i] - want) < 1e-12);
    }
    // the cached template energy must track the blended spectra (Parseval)
    double direct = 0.0;
    for (const auto& s : mixed.template_hat)
        for (const auto& z : s.v) direct += std::norm(z);
    direct /= 36.0;
    CHECK(mixed.template_norm2 == doctest::Approx(direct).epsilon(1e-12));

    CHECK_THROWS_AS(update(ma, mb, -0.1), ContractError);
    CHECK_THROWS_AS(update(ma, mb, 1.1), ContractError);
    auto mc = train(oracle::random_stack(rng, 4, 4, 2), p);
    CHECK_THROWS_AS(update(ma, mc, 0.5), ContractError);
}

TEST_CASE("scalar alpha blend follows the learning-rate formula") {
    ChannelStack f1(1, 1, 1), f2(1, 1, 1);
    f1.at(0, 0, 0) = 1.0f;
    KcfParams p;
    auto m1 = train(f1, p);
    auto m2 = train(f2, p); // zero features, same alpha_hat by construction
    m1.alpha_hat.v[0] = 1.0;
    m2.alpha_hat.v[0] = 0.0;
    auto out = update(m1, m2, 0.02);
    CHECK(out.alpha_hat.v[0].real() == doctest::Approx(0.98).epsilon(1e-12));
}

TEST_CASE("wrapped_shift maps upper indices to negative displacements") {
    CHECK(wrapped_shift(0, 8) == 0);
    CHECK(wrapped_shift(4, 8) == 4);  // dim/2 stays positive
    CHECK(wrapped_shift(5, 8) == -3);
    CHECK(wrapped_shift(7, 8) == -1);
    CHECK(wrapped_shift(3, 7) == 3);
    CHECK(wrapped_shift(4, 7) == -3);
}

TEST_CASE("params validation rejects out-of-range values") {
    KcfParams p;
    p.lambda = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = {};
    p.learning_rate = 1.5;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = {};
    p.cell_size = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = {};
    CHECK_NOTHROW(p.validate());
}

} // TEST_SUITE("kcf")
