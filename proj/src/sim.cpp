#include "gridkcf/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "gridkcf/errors.hpp"
#include "gridkcf/rng.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace gridkcf {

namespace {

// Stream ids for the independent noise fields. Keeping them fixed constants
// (rather than derived from list positions alone) means adding a target never
// changes the background, which the rendering tests rely on.
constexpr std::uint64_t kSaltShared = 0x5bd1e995'00000001ULL;
constexpr std::uint64_t kSaltChannel = 0x5bd1e995'00000002ULL;
constexpr std::uint64_t kSaltJitter = 0x5bd1e995'00000003ULL;
constexpr std::uint64_t kSaltTarget = 0x5bd1e995'00000004ULL;
constexpr std::uint64_t kSaltOccluder = 0x5bd1e995'00000005ULL;

std::uint64_t lattice_key(std::uint64_t salt, long gx, long gy) {
    const auto ux = static_cast<std::uint64_t>(static_cast<std::int64_t>(gx));
    const auto uy = static_cast<std::uint64_t>(static_cast<std::int64_t>(gy));
    return mix_keys(mix_keys(salt, ux), uy);
}

// Value noise: hashed lattice values, smoothstep-blended. One octave returns
// values in [0,1).
double value_noise(double x, double y, std::uint64_t salt) {
    const double fx = std::floor(x);
    const double fy = std::floor(y);
    const long gx = static_cast<long>(fx);
    const long gy = static_cast<long>(fy);
    const double tx = x - fx;
    const double ty = y - fy;
    const double ux = tx * tx * (3.0 - 2.0 * tx);
    const double uy = ty * ty * (3.0 - 2.0 * ty);

    const double v00 = to_unit_double(hash64(lattice_key(salt, gx, gy)));
    const double v10 = to_unit_double(hash64(lattice_key(salt, gx + 1, gy)));
    const double v01 = to_unit_double(hash64(lattice_key(salt, gx, gy + 1)));
    const double v11 = to_unit_double(hash64(lattice_key(salt, gx + 1, gy + 1)));

    const double top = v00 + (v10 - v00) * ux;
    const double bot = v01 + (v11 - v01) * ux;
    return top + (bot - top) * uy;
}

// Octave sum with halving amplitude, normalized back into [0,1).
double fbm(double x, double y, std::uint64_t salt, int octaves, double scale) {
    double sum = 0.0;
    double amp = 1.0;
    double norm = 0.0;
    double freq = 1.0 / scale;
    for (int o = 0; o < octaves; ++o) {
        sum += amp * value_noise(x * freq, y * freq, mix_keys(salt, static_cast<std::uint64_t>(o)));
        norm += amp;
        amp *= 0.5;
        freq *= 2.0;
    }
    return sum / norm;
}

// Overlap of [a0,a1] and [b0,b1], never negative.
double overlap1d(double a0, double a1, double b0, double b1) {
    return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

struct Box {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
    double area() const { return std::max(0.0, x1 - x0) * std::max(0.0, y1 - y0); }
};

Box target_box(const Point2d& center, const TargetSpec& t) {
    return {center.x - t.w / 2.0, center.y - t.h / 2.0,
            center.x + t.w / 2.0, center.y + t.h / 2.0};
}

// Fraction of the unit pixel box around (px,py) covered by `b`.
double pixel_coverage(double px, double py, const Box& b) {
    return overlap1d(px - 0.5, px + 0.5, b.x0, b.x1) *
           overlap1d(py - 0.5, py + 0.5, b.y0, b.y1);
}

// Area of bbox covered by the union of the occluders, exact for axis-aligned
// rectangles via coordinate compression.
double union_covered_area(const Box& bbox, const std::vector<Rect>& occluders) {
    std::vector<Box> clipped;
    for (const Rect& r : occluders) {
        Box b{std::max(bbox.x0, static_cast<double>(r.x)),
              std::max(bbox.y0, static_cast<double>(r.y)),
              std::min(bbox.x1, static_cast<double>(r.x + r.w)),
              std::min(bbox.y1, static_cast<double>(r.y + r.h))};
        if (b.x1 > b.x0 && b.y1 > b.y0)
            clipped.push_back(b);
    }
    if (clipped.empty())
        return 0.0;

    std::vector<double> xs, ys;
    for (const Box& b : clipped) {
        xs.push_back(b.x0);
        xs.push_back(b.x1);
        ys.push_back(b.y0);
        ys.push_back(b.y1);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

    double area = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
            const double mx = 0.5 * (xs[i] + xs[i + 1]);
            const double my = 0.5 * (ys[j] + ys[j + 1]);
            for (const Box& b : clipped) {
                if (mx > b.x0 && mx < b.x1 && my > b.y0 && my < b.y1) {
                    area += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
                    break;
                }
            }
        }
    }
    return area;
}

// Per-frame camera pose: small rotation about the canvas center plus a
// translation, both drawn uniformly from the jitter bounds. Frame 0 is the
// canonical view by construction. The returned homography maps stored pixel
// coordinates to canonical scene coordinates, i.e. it is exactly the
// to_canonical entry the manifest carries.
Homography jitter_transform(const ScenarioSpec& spec, int frame) {
    Homography h; // identity
    if (frame == 0)
        return h;
    Rng rng(mix_keys(mix_keys(spec.seed, kSaltJitter), static_cast<std::uint64_t>(frame)));
    const double max_rot = spec.camera_jitter.max_rotation_deg * std::numbers::pi / 180.0;
    const double a = rng.uniform(-max_rot, max_rot);
    const double tx = rng.uniform(-spec.camera_jitter.max_translation_px,
                                  spec.camera_jitter.max_translation_px);
    const double ty = rng.uniform(-spec.camera_jitter.max_translation_px,
                                  spec.camera_jitter.max_translation_px);
    const double cx = spec.width / 2.0;
    const double cy = spec.height / 2.0;
    const double c = std::cos(a), s = std::sin(a);
    // rotate about (cx,cy), then translate
    h.m = {c, -s, cx - c * cx + s * cy + tx,
           s, c, cy - s * cx - c * cy + ty,
           0.0, 0.0, 1.0};
    return h;
}

double albedo_for(const TargetSpec& t, int channel) {
    if (t.albedo.empty())
        return 0.9;
    return t.albedo[static_cast<std::size_t>(channel) % t.albedo.size()];
}

struct TargetFramePose {
    Point2d center;
    Box box;
};

// Scene sampler shared by the renderer. All coordinates canonical.
struct Scene {
    const ScenarioSpec& spec;
    const std::vector<TargetFramePose>& targets; // one per target, this frame

    double background(double x, double y, double shared, int ch) const {
        const double pc = fbm(x, y, mix_keys(mix_keys(spec.seed, kSaltChannel),
                                             static_cast<std::uint64_t>(ch)),
                              spec.background.octaves, spec.background.scale);
        const double v = 0.7 * shared + 0.3 * pc;
        return spec.background.base + spec.background.contrast * (v - 0.5);
    }

    double shared_field(double x, double y) const {
        return fbm(x, y, mix_keys(spec.seed, kSaltShared),
                   spec.background.octaves, spec.background.scale);
    }

    // Texture modulation riding on a target's albedo. Local coordinates so the
    // pattern travels with the target; amplitude kept small so the intensity
    // centroid stays on the geometric center.
    double target_texture(std::size_t ti, double lx, double ly) const {
        const double n = fbm(lx, ly, mix_keys(mix_keys(spec.seed, kSaltTarget),
                                              static_cast<std::uint64_t>(ti)),
                             2, 5.0);
        return 0.9 + 0.2 * n;
    }

    double occluder_value(std::size_t oi, double x, double y) const {
        const double n = fbm(x, y, mix_keys(mix_keys(spec.seed, kSaltOccluder),
                                            static_cast<std::uint64_t>(oi)),
                             2, 9.0);
        return 0.2 + 0.25 * n;
    }
};

void render_frame(const ScenarioSpec& spec, int frame,
                  const std::vector<TargetFramePose>& poses,
                  const Homography& to_canonical, ChannelStack& out) {
    const Scene scene{spec, poses};
    const int w = spec.width;
    const int h = spec.height;
    const int nc = spec.channels;
    std::vector<double> value(static_cast<std::size_t>(nc));
    (void)frame;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const Point2d c = to_canonical.apply({static_cast<double>(x), static_cast<double>(y)});
            const double shared = scene.shared_field(c.x, c.y);
            for (int ch = 0; ch < nc; ++ch)
                value[static_cast<std::size_t>(ch)] = scene.background(c.x, c.y, shared, ch);

            for (std::size_t ti = 0; ti < poses.size(); ++ti) {
                const double a = pixel_coverage(c.x, c.y, poses[ti].box);
                if (a <= 0.0)
                    continue;
                const double tex = scene.target_texture(ti, c.x - poses[ti].center.x,
                                                        c.y - poses[ti].center.y);
                for (int ch = 0; ch < nc; ++ch) {
                    const double tv = albedo_for(spec.targets[ti], ch) * tex;
                    auto& v = value[static_cast<std::size_t>(ch)];
                    v += a * (tv - v);
                }
            }

            for (std::size_t oi = 0; oi < spec.occluders.size(); ++oi) {
                const Rect& r = spec.occluders[oi];
                const Box b{static_cast<double>(r.x), static_cast<double>(r.y),
                            static_cast<double>(r.x + r.w), static_cast<double>(r.y + r.h)};
                const double a = pixel_coverage(c.x, c.y, b);
                if (a <= 0.0)
                    continue;
                const double ov = scene.occluder_value(oi, c.x, c.y);
                for (int ch = 0; ch < nc; ++ch) {
                    auto& v = value[static_cast<std::size_t>(ch)];
                    v += a * (ov - v);
                }
            }

            for (int ch = 0; ch < nc; ++ch)
                out.at(x, y, ch) = static_cast<float>(std::clamp(value[static_cast<std::size_t>(ch)], 0.0, 1.0));
        }
    }
}

std::string frame_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%06d.hsif", index);
    return buf;
}

} // namespace

void ScenarioSpec::validate() const {
    if (width < 16 || height < 16)
        throw ConfigError("scenario: canvas must be at least 16x16");
    if (frames < 1)
        throw ConfigError("scenario: frame count must be positive");
    if (fps <= 0.0)
        throw ConfigError("scenario: fps must be positive");
    if (channels < 1)
        throw ConfigError("scenario: channel count must be positive");
    if (background.octaves < 1)
        throw ConfigError("scenario: background octaves must be positive");
    if (background.scale <= 0.0)
        throw ConfigError("scenario: background scale must be positive");
    if (camera_jitter.max_translation_px < 0.0 || camera_jitter.max_rotation_deg < 0.0)
        throw ConfigError("scenario: jitter bounds must be non-negative");
    if (occlusion_coverage <= 0.0 || occlusion_coverage > 1.0)
        throw ConfigError("scenario: occlusion_coverage must be in (0,1]");
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const TargetSpec& t = targets[i];
        if (t.w <= 0.0 || t.h <= 0.0)
            throw ConfigError("scenario: target " + std::to_string(i) + " has non-positive size");
        if (t.speed < 0.0)
            throw ConfigError("scenario: target " + std::to_string(i) + " has negative speed");
        for (double a : t.albedo)
            if (a < 0.0 || a > 1.0)
                throw ConfigError("scenario: target " + std::to_string(i) +
                                  " albedo values must be in [0,1]");
    }
    for (std::size_t i = 0; i < occluders.size(); ++i)
        if (occluders[i].w <= 0 || occluders[i].h <= 0)
            throw ConfigError("scenario: occluder " + std::to_string(i) + " has non-positive size");
}

Point2d target_center_at(const ScenarioSpec& spec, std::size_t t, int frame) {
    if (t >= spec.targets.size())
        throw ContractError("target_center_at: target index out of range");
    const TargetSpec& ts = spec.targets[t];
    double remaining = ts.speed * frame / spec.fps; // px travelled by this frame
    Point2d pos = ts.position;
    for (const Point2d& wp : ts.waypoints) {
        const double dx = wp.x - pos.x;
        const double dy = wp.y - pos.y;
        const double len = std::hypot(dx, dy);
        if (len <= 0.0)
            continue;
        if (remaining >= len) {
            remaining -= len;
            pos = wp;
            continue;
        }
        const double f = remaining / len;
        return {pos.x + f * dx, pos.y + f * dy};
    }
    return pos; // parked at the final waypoint
}

ScenarioSpec parse_scenario(const std::string& json_text, const std::string& origin) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        throw ConfigError(origin + ": invalid JSON: " + e.what());
    }
    if (!j.is_object())
        throw ConfigError(origin + ": scenario root must be an object");

    ScenarioSpec spec;
    try {
        spec.width = j.value("width", spec.width);
        spec.height = j.value("height", spec.height);
        spec.frames = j.value("frames", spec.frames);
        spec.fps = j.value("fps", spec.fps);
        spec.channels = j.value("channels", spec.channels);
        spec.seed = j.value("seed", spec.seed);
        if (j.contains("background")) {
            const auto& b = j.at("background");
            spec.background.scale = b.value("scale", spec.background.scale);
            spec.background.octaves = b.value("octaves", spec.background.octaves);
            spec.background.contrast = b.value("contrast", spec.background.contrast);
            spec.background.base = b.value("base", spec.background.base);
        }
        if (j.contains("camera_jitter")) {
            const auto& c = j.at("camera_jitter");
            spec.camera_jitter.max_translation_px =
                c.value("max_translation_px", spec.camera_jitter.max_translation_px);
            spec.camera_jitter.max_rotation_deg =
                c.value("max_rotation_deg", spec.camera_jitter.max_rotation_deg);
        }
        spec.occlusion_coverage = j.value("occlusion_coverage", spec.occlusion_coverage);
        for (const auto& tj : j.value("targets", ordered_json::array())) {
            TargetSpec t;
            if (tj.contains("size")) {
                t.w = tj.at("size").at(0).get<double>();
                t.h = tj.at("size").at(1).get<double>();
            }
            if (tj.contains("position")) {
                t.position.x = tj.at("position").at(0).get<double>();
                t.position.y = tj.at("position").at(1).get<double>();
            }
            for (const auto& wj : tj.value("waypoints", ordered_json::array()))
                t.waypoints.push_back({wj.at(0).get<double>(), wj.at(1).get<double>()});
            t.speed = tj.value("speed_px_per_s", t.speed);
            t.albedo = tj.value("albedo", t.albedo);
            spec.targets.push_back(std::move(t));
        }
        for (const auto& oj : j.value("occluders", ordered_json::array())) {
            const auto& rj = oj.contains("rect") ? oj.at("rect") : oj;
            spec.occluders.push_back({rj.at(0).get<int>(), rj.at(1).get<int>(),
                                      rj.at(2).get<int>(), rj.at(3).get<int>()});
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(origin + ": malformed scenario: " + e.what());
    }
    spec.validate();
    return spec;
}

ScenarioSpec load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open scenario file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path);
}

SequenceManifest generate(const ScenarioSpec& spec, const std::string& out_dir, ThreadPool* pool) {
    spec.validate();

    // Resolve every target's path first and insist it stays on the canvas; a
    // clipped target would silently corrupt the ground truth.
    std::vector<std::vector<TargetFramePose>> poses(static_cast<std::size_t>(spec.frames));
    for (int f = 0; f < spec.frames; ++f) {
        poses[static_cast<std::size_t>(f)].resize(spec.targets.size());
        for (std::size_t ti = 0; ti < spec.targets.size(); ++ti) {
            const Point2d c = target_center_at(spec, ti, f);
            const Box b = target_box(c, spec.targets[ti]);
            if (b.x0 < 0.0 || b.y0 < 0.0 || b.x1 > spec.width || b.y1 > spec.height)
                throw ConfigError("scenario: target " + std::to_string(ti) +
                                  " leaves the canvas at frame " + std::to_string(f));
            poses[static_cast<std::size_t>(f)][ti] = {c, b};
        }
    }

    fs::create_directories(fs::path(out_dir) / "frames");

    std::vector<Homography> cams(static_cast<std::size_t>(spec.frames));
    for (int f = 0; f < spec.frames; ++f)
        cams[static_cast<std::size_t>(f)] = jitter_transform(spec, f);

    auto render_one = [&](std::size_t f) {
        ChannelStack img(spec.width, spec.height, spec.channels);
        render_frame(spec, static_cast<int>(f), poses[f], cams[f], img);
        save_hsif(img, (fs::path(out_dir) / "frames" / frame_name(static_cast<int>(f))).string());
    };
    if (pool)
        pool->parallel_for(static_cast<std::size_t>(spec.frames), render_one);
    else
        for (std::size_t f = 0; f < static_cast<std::size_t>(spec.frames); ++f)
            render_one(f);

    SequenceManifest m;
    m.fps = spec.fps;
    m.channels = spec.channels;
    m.base_dir = out_dir;
    for (int f = 0; f < spec.frames; ++f) {
        FrameEntry e;
        e.index = f;
        e.timestamp = f / spec.fps;
        e.path = "frames/" + frame_name(f);
        e.to_canonical = cams[static_cast<std::size_t>(f)];
        m.frames.push_back(std::move(e));
    }

    for (std::size_t ti = 0; ti < spec.targets.size(); ++ti) {
        std::vector<GroundTruthEntry> gt;
        for (int f = 0; f < spec.frames; ++f) {
            const TargetFramePose& p = poses[static_cast<std::size_t>(f)][ti];
            GroundTruthEntry e;
            e.frame = f;
            e.cx = p.center.x;
            e.cy = p.center.y;
            e.w = spec.targets[ti].w;
            e.h = spec.targets[ti].h;
            const double covered = union_covered_area(p.box, spec.occluders);
            e.occluded = covered >= spec.occlusion_coverage * p.box.area() - 1e-9;
            gt.push_back(e);
        }
        const std::string name = "gt_t" + std::to_string(ti) + ".csv";
        save_ground_truth(gt, (fs::path(out_dir) / name).string());
        m.ground_truth.push_back(name);
    }

    save_manifest(m, (fs::path(out_dir) / "manifest.json").string());
    return m;
}

SequenceManifest downsample(const SequenceManifest& manifest, int factor) {
    if (factor < 1)
        throw ConfigError("downsample: factor must be at least 1");
    if (factor >= static_cast<int>(manifest.frames.size()))
        throw ConfigError("downsample: factor " + std::to_string(factor) +
                          " must be smaller than the frame count (" +
                          std::to_string(manifest.frames.size()) + ")");
    SequenceManifest out = manifest;
    out.frames.clear();
    for (std::size_t i = 0; i < manifest.frames.size(); i += static_cast<std::size_t>(factor))
        out.frames.push_back(manifest.frames[i]);
    out.fps = manifest.fps / factor;
    return out;
}

} // namespace gridkcf
