#include "gridkcf/registration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include <Eigen/Dense>

#include "gridkcf/errors.hpp"
#include "gridkcf/rng.hpp"

namespace gridkcf {

// ---- Homography ----------------------------------------------------------------

double Homography::det() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
}

Homography Homography::normalized() const {
    if (std::abs(m[8]) < 1e-12)
        throw ContractError("homography: h[2][2] is ~0, cannot normalize");
    Homography out;
    for (int i = 0; i < 9; ++i) out.m[i] = m[i] / m[8];
    return out;
}

Homography Homography::inverse() const {
    const double d = det();
    if (std::abs(d) < 1e-12) throw ContractError("homography: singular, cannot invert");
    Homography inv;
    inv.m[0] = (m[4] * m[8] - m[5] * m[7]) / d;
    inv.m[1] = (m[2] * m[7] - m[1] * m[8]) / d;
    inv.m[2] = (m[1] * m[5] - m[2] * m[4]) / d;
    inv.m[3] = (m[5] * m[6] - m[3] * m[8]) / d;
    inv.m[4] = (m[0] * m[8] - m[2] * m[6]) / d;
    inv.m[5] = (m[2] * m[3] - m[0] * m[5]) / d;
    inv.m[6] = (m[3] * m[7] - m[4] * m[6]) / d;
    inv.m[7] = (m[1] * m[6] - m[0] * m[7]) / d;
    inv.m[8] = (m[0] * m[4] - m[1] * m[3]) / d;
    return inv.normalized();
}

Point2d Homography::apply(const Point2d& p) const {
    const double w = m[6] * p.x + m[7] * p.y + m[8];
    return {(m[0] * p.x + m[1] * p.y + m[2]) / w, (m[3] * p.x + m[4] * p.y + m[5]) / w};
}

Homography accumulate(const Homography& prev, const Homography& step) {
    Homography out;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            double acc = 0.0;
            for (int k = 0; k < 3; ++k) acc += prev.m[r * 3 + k] * step.m[k * 3 + c];
            out.m[r * 3 + c] = acc;
        }
    if (std::abs(out.det()) <= 1e-12)
        throw ContractError("accumulate: near-singular homography product");
    return out.normalized();
}

// ---- Harris keypoints ------------------------------------------------------------

namespace {

constexpr int kPatchRadius = 5;    // 11x11 descriptors
constexpr int kNmsRadius = 5;
constexpr int kBorderMargin = 8;   // patch + subpixel search headroom
constexpr double kHarrisK = 0.04;

// 7-tap Gaussian (sigma 1.5) smoothing along one axis
void smooth7(std::vector<float>& img, int w, int h, bool horizontal) {
    static const std::array<float, 7> g = [] {
        std::array<float, 7> k{};
        float sum = 0.0f;
        for (int i = -3; i <= 3; ++i) {
            k[i + 3] = std::exp(-static_cast<float>(i * i) / (2.0f * 1.5f * 1.5f));
            sum += k[i + 3];
        }
        for (auto& v : k) v /= sum;
        return k;
    }();
    std::vector<float> out(img.size(), 0.0f);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            float acc = 0.0f;
            for (int i = -3; i <= 3; ++i) {
                int sx = horizontal ? std::clamp(x + i, 0, w - 1) : x;
                int sy = horizontal ? y : std::clamp(y + i, 0, h - 1);
                acc += g[i + 3] * img[static_cast<std::size_t>(sy) * w + sx];
            }
            out[static_cast<std::size_t>(y) * w + x] = acc;
        }
    img = std::move(out);
}

} // namespace

std::vector<Keypoint> detect_keypoints(const ChannelStack& gray, int max_count) {
    if (gray.channels() != 1) throw ContractError("detect_keypoints: expected single channel");
    if (gray.width() < 16 || gray.height() < 16)
        throw ContractError("detect_keypoints: image must be at least 16x16");
    if (max_count <= 0) return {};

    const int w = gray.width(), h = gray.height();
    const float* img = gray.plane(0);
    auto px = [&](int x, int y) { return img[static_cast<std::size_t>(y) * w + x]; };

    std::vector<float> ixx(static_cast<std::size_t>(w) * h, 0.0f);
    std::vector<float> iyy(ixx.size(), 0.0f), ixy(ixx.size(), 0.0f);
    for (int y = 1; y < h - 1; ++y)
        for (int x = 1; x < w - 1; ++x) {
            float dx = 0.5f * (px(x + 1, y) - px(x - 1, y));
            float dy = 0.5f * (px(x, y + 1) - px(x, y - 1));
            std::size_t i = static_cast<std::size_t>(y) * w + x;
            ixx[i] = dx * dx;
            iyy[i] = dy * dy;
            ixy[i] = dx * dy;
        }
    for (auto* m : {&ixx, &iyy, &ixy}) {
        smooth7(*m, w, h, true);
        smooth7(*m, w, h, false);
    }

    std::vector<float> resp(ixx.size(), 0.0f);
    float rmax = 0.0f;
    for (std::size_t i = 0; i < resp.size(); ++i) {
        float tr = ixx[i] + iyy[i];
        float det = ixx[i] * iyy[i] - ixy[i] * ixy[i];
        resp[i] = det - static_cast<float>(kHarrisK) * tr * tr;
        rmax = std::max(rmax, resp[i]);
    }
    if (rmax <= 0.0f) return {};
    const float thresh = std::max(rmax * 1e-4f, 1e-18f);

    std::vector<Keypoint> found;
    for (int y = kBorderMargin; y < h - kBorderMargin; ++y)
        for (int x = kBorderMargin; x < w - kBorderMargin; ++x) {
            float r = resp[static_cast<std::size_t>(y) * w + x];
            if (r < thresh) continue;
            // strictly greater neighbour suppresses; ties go to the first
            // candidate in row-major order so plateaus yield one keypoint
            bool is_max = true;
            for (int dy = -kNmsRadius; dy <= kNmsRadius && is_max; ++dy)
                for (int dx = -kNmsRadius; dx <= kNmsRadius; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const int nx = x + dx, ny = y + dy;
                    const float nr = resp[static_cast<std::size_t>(ny) * w + nx];
                    if (nr > r || (nr == r && (ny < y || (ny == y && nx < x)))) {
                        is_max = false;
                        break;
                    }
                }
            if (is_max) found.push_back({x, y, r});
        }

    std::stable_sort(found.begin(), found.end(), [](const Keypoint& a, const Keypoint& b) {
        if (a.strength != b.strength) return a.strength > b.strength;
        return a.y != b.y ? a.y < b.y : a.x < b.x;
    });
    if (static_cast<int>(found.size()) > max_count) found.resize(static_cast<std::size_t>(max_count));
    return found;
}

// ---- descriptors and matching ------------------------------------------------------

std::vector<Descriptor> extract_descriptors(const ChannelStack& gray,
                                            const std::vector<Keypoint>& keypoints) {
    if (gray.channels() != 1) throw ContractError("extract_descriptors: expected single channel");
    const int w = gray.width(), h = gray.height();
    const float* img = gray.plane(0);

    std::vector<Descriptor> out;
    out.reserve(keypoints.size());
    for (const auto& kp : keypoints) {
        if (kp.x < kPatchRadius || kp.y < kPatchRadius || kp.x >= w - kPatchRadius ||
            kp.y >= h - kPatchRadius)
            continue;
        Descriptor d;
        d.x = kp.x;
        d.y = kp.y;
        d.patch.resize(121);
        double sum = 0.0;
        int i = 0;
        for (int dy = -kPatchRadius; dy <= kPatchRadius; ++dy)
            for (int dx = -kPatchRadius; dx <= kPatchRadius; ++dx, ++i) {
                float v = img[static_cast<std::size_t>(kp.y + dy) * w + (kp.x + dx)];
                d.patch[static_cast<std::size_t>(i)] = v;
                sum += v;
            }
        const float mean = static_cast<float>(sum / 121.0);
        double norm2 = 0.0;
        for (auto& v : d.patch) {
            v -= mean;
            norm2 += static_cast<double>(v) * v;
        }
        if (norm2 < 1e-12) continue; // flat patch carries no signal
        const float inv = static_cast<float>(1.0 / std::sqrt(norm2));
        for (auto& v : d.patch) v *= inv;
        out.push_back(std::move(d));
    }
    return out;
}

namespace {

double patch_dist2(const Descriptor& a, const Descriptor& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.patch.size(); ++i) {
        double d = static_cast<double>(a.patch[i]) - b.patch[i];
        acc += d * d;
    }
    return acc;
}

} // namespace

std::vector<Match> match_descriptors(const std::vector<Descriptor>& a,
                                     const std::vector<Descriptor>& b, double ratio) {
    std::vector<Match> out;
    if (a.empty() || b.empty()) return out;

    // nearest neighbour of every b in a, for the mutual check
    std::vector<int> best_a_for_b(b.size(), -1);
    for (std::size_t j = 0; j < b.size(); ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < a.size(); ++i) {
            double d = patch_dist2(a[i], b[j]);
            if (d < best) {
                best = d;
                best_a_for_b[j] = static_cast<int>(i);
            }
        }
    }

    for (std::size_t i = 0; i < a.size(); ++i) {
        double d1 = std::numeric_limits<double>::infinity();
        double d2 = std::numeric_limits<double>::infinity();
        int bj = -1;
        for (std::size_t j = 0; j < b.size(); ++j) {
            double d = patch_dist2(a[i], b[j]);
            if (d < d1) {
                d2 = d1;
                d1 = d;
                bj = static_cast<int>(j);
            } else if (d < d2) {
                d2 = d;
            }
        }
        if (bj < 0) continue;
        if (best_a_for_b[static_cast<std::size_t>(bj)] != static_cast<int>(i)) continue;
        if (!(std::sqrt(d1) < ratio * std::sqrt(d2))) continue;
        out.push_back({{a[i].x, a[i].y}, {b[static_cast<std::size_t>(bj)].x, b[static_cast<std::size_t>(bj)].y},
                       std::sqrt(d1)});
    }
    return out;
}

// ---- subpixel refinement ----------------------------------------------------------

namespace {

double ncc_at(const float* a, int aw, int ax, int ay, const float* b, int bw, int bx, int by) {
    double sa = 0.0, sb = 0.0;
    for (int dy = -kPatchRadius; dy <= kPatchRadius; ++dy)
        for (int dx = -kPatchRadius; dx <= kPatchRadius; ++dx) {
            sa += a[static_cast<std::size_t>(ay + dy) * aw + (ax + dx)];
            sb += b[static_cast<std::size_t>(by + dy) * bw + (bx + dx)];
        }
    const double ma = sa / 121.0, mb = sb / 121.0;
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int dy = -kPatchRadius; dy <= kPatchRadius; ++dy)
        for (int dx = -kPatchRadius; dx <= kPatchRadius; ++dx) {
            double va = a[static_cast<std::size_t>(ay + dy) * aw + (ax + dx)] - ma;
            double vb = b[static_cast<std::size_t>(by + dy) * bw + (bx + dx)] - mb;
            dot += va * vb;
            na += va * va;
            nb += vb * vb;
        }
    const double denom = std::sqrt(na * nb);
    return denom < 1e-12 ? -1.0 : dot / denom;
}

// peak offset of a 3-point parabola through (-1,y0),(0,y1),(1,y2), clamped
double parabola_peak(double y0, double y1, double y2) {
    const double denom = y0 - 2.0 * y1 + y2;
    if (denom >= -1e-12) return 0.0; // not concave enough to trust
    double d = 0.5 * (y0 - y2) / denom;
    return std::clamp(d, -0.5, 0.5);
}

} // namespace

void refine_matches_subpixel(const ChannelStack& gray_a, const ChannelStack& gray_b,
                             std::vector<Match>& matches, int radius) {
    if (gray_a.channels() != 1 || gray_b.channels() != 1)
        throw ContractError("refine_matches_subpixel: expected single-channel frames");
    if (radius < 1) return;

    const float* a = gray_a.plane(0);
    const float* b = gray_b.plane(0);
    const int aw = gray_a.width(), ah = gray_a.height();
    const int bw = gray_b.width(), bh = gray_b.height();
    const int reach = kPatchRadius + radius + 1; // +1 for the parabola neighbours

    for (auto& m : matches) {
        const int ax = static_cast<int>(std::lround(m.p.x));
        const int ay = static_cast<int>(std::lround(m.p.y));
        const int bx = static_cast<int>(std::lround(m.q.x));
        const int by = static_cast<int>(std::lround(m.q.y));
        if (ax < kPatchRadius || ay < kPatchRadius || ax >= aw - kPatchRadius ||
            ay >= ah - kPatchRadius)
            continue;
        if (bx < reach || by < reach || bx >= bw - reach || by >= bh - reach) continue;

        const int span = 2 * (radius + 1) + 1;
        std::vector<double> score(static_cast<std::size_t>(span) * span);
        auto sc = [&](int du, int dv) -> double& {
            return score[static_cast<std::size_t>(dv + radius + 1) * span + (du + radius + 1)];
        };
        for (int dv = -radius - 1; dv <= radius + 1; ++dv)
            for (int du = -radius - 1; du <= radius + 1; ++du)
                sc(du, dv) = ncc_at(a, aw, ax, ay, b, bw, bx + du, by + dv);

        int bu = 0, bv = 0;
        double best = -2.0;
        for (int dv = -radius; dv <= radius; ++dv)
            for (int du = -radius; du <= radius; ++du)
                if (sc(du, dv) > best) {
                    best = sc(du, dv);
                    bu = du;
                    bv = dv;
                }
        if (best <= -1.0) continue;
        // a perfect correlation is already the optimum; fitting the parabola
        // there would only add its asymmetry bias
        if (best >= 1.0 - 1e-9) {
            m.q.x = bx + bu;
            m.q.y = by + bv;
            continue;
        }

        const double du = parabola_peak(sc(bu - 1, bv), sc(bu, bv), sc(bu + 1, bv));
        const double dv = parabola_peak(sc(bu, bv - 1), sc(bu, bv), sc(bu, bv + 1));
        m.q.x = bx + bu + du;
        m.q.y = by + bv + dv;
    }
}

// ---- RANSAC ------------------------------------------------------------------------

namespace {

bool collinear(const Point2d& a, const Point2d& b, const Point2d& c) {
    const double cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    return std::abs(cross) < 1e-6;
}

bool degenerate_quad(const std::array<Point2d, 4>& pts) {
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            for (int k = j + 1; k < 4; ++k)
                if (collinear(pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)],
                              pts[static_cast<std::size_t>(k)]))
                    return true;
    return false;
}

struct NormT {
    double scale = 1.0, cx = 0.0, cy = 0.0;
    Eigen::Matrix3d matrix() const {
        Eigen::Matrix3d t;
        t << scale, 0, -scale * cx, 0, scale, -scale * cy, 0, 0, 1;
        return t;
    }
};

std::optional<NormT> hartley_normalization(const std::vector<Point2d>& pts) {
    NormT t;
    for (const auto& p : pts) {
        t.cx += p.x;
        t.cy += p.y;
    }
    t.cx /= static_cast<double>(pts.size());
    t.cy /= static_cast<double>(pts.size());
    double mean_dist = 0.0;
    for (const auto& p : pts) mean_dist += std::hypot(p.x - t.cx, p.y - t.cy);
    mean_dist /= static_cast<double>(pts.size());
    if (mean_dist < 1e-12) return std::nullopt;
    t.scale = std::numbers::sqrt2 / mean_dist;
    return t;
}

// Direct linear transform over >= 4 correspondences, Hartley-normalized.
std::optional<Homography> dlt(const std::vector<Point2d>& ps, const std::vector<Point2d>& qs) {
    const std::size_t n = ps.size();
    auto tp = hartley_normalization(ps);
    auto tq = hartley_normalization(qs);
    if (!tp || !tq) return std::nullopt;

    Eigen::MatrixXd a(2 * n, 9);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = tp->scale * (ps[i].x - tp->cx);
        const double y = tp->scale * (ps[i].y - tp->cy);
        const double u = tq->scale * (qs[i].x - tq->cx);
        const double v = tq->scale * (qs[i].y - tq->cy);
        a.row(2 * static_cast<Eigen::Index>(i)) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
        a.row(2 * static_cast<Eigen::Index>(i) + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    Eigen::VectorXd hvec = svd.matrixV().col(8);
    Eigen::Matrix3d hn;
    hn << hvec(0), hvec(1), hvec(2), hvec(3), hvec(4), hvec(5), hvec(6), hvec(7), hvec(8);

    Eigen::Matrix3d hm = tq->matrix().inverse() * hn * tp->matrix();
    Homography h;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) h.m[static_cast<std::size_t>(r * 3 + c)] = hm(r, c);
    for (double v : h.m)
        if (!std::isfinite(v)) return std::nullopt;
    if (std::abs(h.m[8]) < 1e-12 || std::abs(h.det()) < 1e-12) return std::nullopt;
    return h.normalized();
}

double reproj_err2(const Homography& h, const Match& m) {
    const Point2d r = h.apply(m.p);
    if (!std::isfinite(r.x) || !std::isfinite(r.y)) return std::numeric_limits<double>::infinity();
    const double dx = r.x - m.q.x, dy = r.y - m.q.y;
    return dx * dx + dy * dy;
}

double inlier_rms(const Homography& h, const std::vector<Match>& matches,
                  const std::vector<std::uint8_t>& mask) {
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < matches.size(); ++i)
        if (mask[i]) {
            acc += reproj_err2(h, matches[i]);
            ++n;
        }
    return n == 0 ? 0.0 : std::sqrt(acc / static_cast<double>(n));
}

} // namespace

RansacResult estimate_homography_ransac(const std::vector<Match>& matches, int iterations,
                                        double inlier_tol, std::uint64_t seed) {
    if (matches.size() < 4)
        throw DataError("homography estimation needs >= 4 matches, have " +
                        std::to_string(matches.size()));
    if (iterations < 1) throw ContractError("estimate_homography_ransac: iterations must be >= 1");
    if (inlier_tol <= 0.0) throw ContractError("estimate_homography_ransac: tolerance must be > 0");

    const double tol2 = inlier_tol * inlier_tol;
    Rng rng(seed);

    std::optional<Homography> best_h;
    std::vector<std::uint8_t> best_mask;
    std::size_t best_count = 0;

    std::vector<Point2d> ps(4), qs(4);
    for (int it = 0; it < iterations; ++it) {
        std::array<std::size_t, 4> idx{};
        for (int k = 0; k < 4; ++k) {
            bool fresh;
            do {
                idx[static_cast<std::size_t>(k)] = rng.below(matches.size());
                fresh = true;
                for (int j = 0; j < k; ++j)
                    if (idx[static_cast<std::size_t>(j)] == idx[static_cast<std::size_t>(k)]) fresh = false;
            } while (!fresh);
        }
        std::array<Point2d, 4> sp{}, sq{};
        for (int k = 0; k < 4; ++k) {
            sp[static_cast<std::size_t>(k)] = matches[idx[static_cast<std::size_t>(k)]].p;
            sq[static_cast<std::size_t>(k)] = matches[idx[static_cast<std::size_t>(k)]].q;
        }
        if (degenerate_quad(sp) || degenerate_quad(sq)) continue;

        for (int k = 0; k < 4; ++k) {
            ps[static_cast<std::size_t>(k)] = sp[static_cast<std::size_t>(k)];
            qs[static_cast<std::size_t>(k)] = sq[static_cast<std::size_t>(k)];
        }
        auto h = dlt(ps, qs);
        if (!h) continue;

        std::vector<std::uint8_t> mask(matches.size(), 0);
        std::size_t count = 0;
        for (std::size_t i = 0; i < matches.size(); ++i)
            if (reproj_err2(*h, matches[i]) < tol2) {
                mask[i] = 1;
                ++count;
            }
        if (count > best_count) {
            best_count = count;
            best_h = *h;
            best_mask = std::move(mask);
        }
    }

    if (!best_h || best_count < 4)
        throw DataError("homography estimation failed: no non-degenerate consensus among " +
                        std::to_string(matches.size()) + " matches");

    // least-squares refit over the winning inliers, kept only if it helps
    const double sample_rms = inlier_rms(*best_h, matches, best_mask);
    std::vector<Point2d> ips, iqs;
    for (std::size_t i = 0; i < matches.size(); ++i)
        if (best_mask[i]) {
            ips.push_back(matches[i].p);
            iqs.push_back(matches[i].q);
        }
    Homography final_h = *best_h;
    if (auto refit = dlt(ips, iqs)) {
        if (inlier_rms(*refit, matches, best_mask) <= sample_rms) final_h = *refit;
    }

    RansacResult res;
    res.h = final_h.normalized();
    res.inliers.assign(matches.size(), 0);
    for (std::size_t i = 0; i < matches.size(); ++i)
        if (reproj_err2(res.h, matches[i]) < tol2) res.inliers[i] = 1;
    res.inlier_rms = inlier_rms(res.h, matches, res.inliers);
    return res;
}

Homography register_frames(const ChannelStack& cur_gray, const ChannelStack& ref_gray,
                           const RegistrationParams& params) {
    auto kc = detect_keypoints(cur_gray, params.max_keypoints);
    auto kr = detect_keypoints(ref_gray, params.max_keypoints);
    auto dc = extract_descriptors(cur_gray, kc);
    auto dr = extract_descriptors(ref_gray, kr);
    auto matches = match_descriptors(dc, dr, params.match_ratio);
    if (params.subpixel) refine_matches_subpixel(cur_gray, ref_gray, matches);
    auto res = estimate_homography_ransac(matches, params.ransac_iterations, params.inlier_tol,
                                          params.seed);
    return res.h;
}

// ---- warp ---------------------------------------------------------------------------

WarpResult warp(const ChannelStack& frame, const Homography& h, ThreadPool* pool) {
    if (frame.empty()) throw ContractError("warp: empty frame");
    const Homography inv = h.inverse(); // canvas -> source
    const int w = frame.width(), ht = frame.height(), nc = frame.channels();

    WarpResult out;
    out.frame = ChannelStack(w, ht, nc);
    out.valid.assign(static_cast<std::size_t>(w) * ht, 0);

    auto do_row = [&](int y) {
        for (int x = 0; x < w; ++x) {
            const Point2d s = inv.apply({static_cast<double>(x), static_cast<double>(y)});
            if (!(std::isfinite(s.x) && std::isfinite(s.y))) continue;
            if (s.x < 0.0 || s.y < 0.0 || s.x > w - 1.0 || s.y > ht - 1.0) continue;
            const int x0 = static_cast<int>(std::floor(s.x));
            const int y0 = static_cast<int>(std::floor(s.y));
            const int x1 = std::min(x0 + 1, w - 1);
            const int y1 = std::min(y0 + 1, ht - 1);
            const float fx = static_cast<float>(s.x - x0);
            const float fy = static_cast<float>(s.y - y0);
            const float w00 = (1.0f - fx) * (1.0f - fy);
            const float w10 = fx * (1.0f - fy);
            const float w01 = (1.0f - fx) * fy;
            const float w11 = fx * fy;
            for (int c = 0; c < nc; ++c) {
                const float* sp = frame.plane(c);
                const float v = w00 * sp[static_cast<std::size_t>(y0) * w + x0] +
                                w10 * sp[static_cast<std::size_t>(y0) * w + x1] +
                                w01 * sp[static_cast<std::size_t>(y1) * w + x0] +
                                w11 * sp[static_cast<std::size_t>(y1) * w + x1];
                out.frame.at(x, y, c) = v;
            }
            out.valid[static_cast<std::size_t>(y) * w + x] = 1;
        }
    };

    if (pool) {
        pool->parallel_for(ht, do_row);
    } else {
        for (int y = 0; y < ht; ++y) do_row(y);
    }
    return out;
}

} // namespace gridkcf
