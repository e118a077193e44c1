#include "gridkcf/app.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <thread>

#include <CLI11.hpp>

#include "gridkcf/errors.hpp"
#include "gridkcf/log.hpp"
#include "gridkcf/registration.hpp"
#include "gridkcf/rng.hpp"
#include "gridkcf/sim.hpp"
#include "gridkcf/stopwatch.hpp"

namespace fs = std::filesystem;

namespace gridkcf {

namespace {

std::string fmap_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fmap_%06d.fmap", index);
    return buf;
}

unsigned effective_threads(int threads) {
    if (threads > 0)
        return static_cast<unsigned>(threads);
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? hc : 1;
}

ChannelStack registration_gray(const ChannelStack& frame, int channel) {
    if (channel >= 0) {
        if (channel >= frame.channels())
            throw ConfigError("registration_channel " + std::to_string(channel) +
                              " out of range for a " + std::to_string(frame.channels()) +
                              "-channel frame");
        return to_gray(frame, {channel});
    }
    return to_gray(frame);
}

std::string fmt(double v, const char* spec = "%.3f") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

// Frame path for a manifest copy saved under out_dir: keep absolute paths,
// re-anchor relative ones so the copy still resolves.
std::string rebased_frame_path(const SequenceManifest& m, const std::string& p,
                               const std::string& out_dir) {
    const fs::path resolved = fs::absolute(resolve_path(m, p)).lexically_normal();
    std::error_code ec;
    const fs::path rel = fs::relative(resolved, fs::absolute(out_dir), ec);
    if (ec || rel.empty())
        return resolved.string();
    return rel.string();
}

} // namespace

TrackRunResult run_track(const RunConfig& rc) {
    rc.validate();
    const TrackerConfig tcfg =
        rc.tracker_config.empty() ? TrackerConfig{} : load_tracker_config(rc.tracker_config);
    tcfg.kcf.validate();
    tcfg.grid.validate();

    SequenceManifest m = load_manifest(rc.manifest);
    const bool deep = tcfg.feature.kind == FeatureKind::deep_from_file;
    if (deep && rc.feature_map_dir.empty())
        throw ConfigError("deep-from-file features need feature_map_dir");
    if (deep && rc.registration != RegistrationMode::off)
        throw ConfigError("deep-from-file maps are bound to stored-frame coordinates; "
                          "use registration mode off");
    if (rc.registration == RegistrationMode::from_manifest && !m.has_homographies())
        throw ConfigError("manifest carries no homographies, cannot register from-manifest: " +
                          rc.manifest);
    if (m.ground_truth.empty())
        throw DataError("manifest lists no ground-truth files, nothing to initialize: " +
                        rc.manifest);

    // Initial center per target comes from its ground truth at the first frame.
    const int first_index = m.frames.front().index;
    std::vector<Point2d> init_centers;
    for (std::size_t ti = 0; ti < m.ground_truth.size(); ++ti) {
        const auto rows = load_ground_truth(resolve_path(m, m.ground_truth[ti]));
        const auto it = std::find_if(rows.begin(), rows.end(), [&](const GroundTruthEntry& e) {
            return e.frame == first_index;
        });
        if (it == rows.end())
            throw DataError("ground truth for target " + std::to_string(ti) +
                            " has no entry for the first frame (index " +
                            std::to_string(first_index) + ")");
        init_centers.push_back({it->cx, it->cy});
    }

    ThreadPool pool(effective_threads(rc.threads));
    fs::create_directories(rc.out_dir);

    std::vector<Tracker> trackers;
    trackers.reserve(init_centers.size());
    for (std::size_t ti = 0; ti < init_centers.size(); ++ti) {
        trackers.emplace_back(tcfg);
        trackers.back().set_pool(&pool);
    }

    TrackRunResult res;
    res.trajectories.resize(init_centers.size());
    for (std::size_t ti = 0; ti < init_centers.size(); ++ti)
        res.trajectories[ti].target_id = static_cast<int>(ti);

    RegistrationParams rparams;
    Homography acc;
    ChannelStack prev_gray;

    Stopwatch total;
    for (std::size_t fi = 0; fi < m.frames.size(); ++fi) {
        Stopwatch frame_time;
        const FrameEntry& fe = m.frames[fi];
        ChannelStack frame = load_frame(resolve_path(m, fe.path));
        if (frame.channels() != m.channels)
            throw DataError("frame " + std::to_string(fe.index) + " has " +
                            std::to_string(frame.channels()) + " channels, manifest says " +
                            std::to_string(m.channels));

        ChannelStack canonical;
        const ChannelStack* view = &frame;
        if (rc.registration == RegistrationMode::from_manifest) {
            canonical = warp(frame, *fe.to_canonical, &pool).frame;
            view = &canonical;
        } else if (rc.registration == RegistrationMode::estimate) {
            ChannelStack gray = registration_gray(frame, rc.registration_channel);
            if (fi > 0) {
                rparams.seed = mix_keys(rc.seed, static_cast<std::uint64_t>(fe.index));
                const Homography step = register_frames(gray, prev_gray, rparams);
                acc = accumulate(acc, step);
                canonical = warp(frame, acc, &pool).frame;
                view = &canonical;
            }
            prev_gray = std::move(gray);
        }

        FeatureMap fm;
        std::unique_ptr<FeatureSource> source;
        if (deep) {
            const std::string path = (fs::path(rc.feature_map_dir) / fmap_name(fe.index)).string();
            if (!fs::exists(path))
                throw DataError("missing feature map for frame " + std::to_string(fe.index) +
                                ": " + path);
            fm = load_fmap(path);
            source = std::make_unique<MapFeatureSource>(fm);
        } else {
            source = std::make_unique<PixelFeatureSource>(*view, tcfg.feature);
        }

        for (std::size_t ti = 0; ti < trackers.size(); ++ti) {
            TrajectoryPoint pt;
            pt.frame = fe.index;
            if (fi == 0) {
                trackers[ti].init(*source, init_centers[ti]);
                pt.cx = init_centers[ti].x;
                pt.cy = init_centers[ti].y;
            } else {
                const TrackState st = trackers[ti].step(fe.index, *source);
                pt.cx = st.center.x;
                pt.cy = st.center.y;
                pt.psr = st.best_psr;
                pt.coasting = st.coasting;
            }
            res.trajectories[ti].points.push_back(pt);
        }

        log_info("[timing] frame " + std::to_string(fe.index) + " " +
                 fmt(frame_time.seconds()) + "s");
    }
    res.seconds = total.seconds();
    res.frames = m.frames.size();

    for (std::size_t ti = 0; ti < trackers.size(); ++ti) {
        res.per_target.push_back(trackers[ti].stats());
        save_trajectory(res.trajectories[ti].points,
                        (fs::path(rc.out_dir) / ("traj_" + std::to_string(ti) + ".csv")).string());
    }

    double detect = 0.0, train = 0.0;
    for (const auto& st : res.per_target) {
        detect += st.detect_seconds;
        train += st.train_seconds;
    }
    // wall-clock summary is a log line, never an artifact: reruns with the
    // same config + seed must leave byte-identical files behind
    std::fprintf(stderr, "[timing] frames=%zu seconds=%s fps=%s detect=%s train=%s\n",
                 res.frames, fmt(res.seconds).c_str(),
                 fmt(res.seconds > 0.0 ? static_cast<double>(res.frames) / res.seconds : 0.0).c_str(),
                 fmt(detect).c_str(), fmt(train).c_str());
    return res;
}

void cmd_simulate(const SimulateArgs& args) {
    const ScenarioSpec spec = load_scenario(args.spec_path);
    ThreadPool pool(effective_threads(args.threads));
    const SequenceManifest m = generate(spec, args.out_dir, &pool);
    log_info("simulated " + std::to_string(m.frames.size()) + " frames, " +
             std::to_string(m.ground_truth.size()) + " target(s) into " + args.out_dir);
}

void cmd_track(const TrackArgs& args) {
    RunConfig rc = load_run_config(args.config_path);
    if (args.out_dir)
        rc.out_dir = *args.out_dir;
    if (args.seed)
        rc.seed = *args.seed;
    if (args.threads)
        rc.threads = *args.threads;
    run_track(rc);
}

void cmd_evaluate(const EvaluateArgs& args) {
    // trajectories live in traj_<id>.csv files; the id is authoritative
    std::vector<Trajectory> trajs;
    {
        std::vector<std::pair<int, std::string>> found;
        if (!fs::is_directory(args.traj_dir))
            throw DataError("not a directory: " + args.traj_dir);
        for (const auto& entry : fs::directory_iterator(args.traj_dir)) {
            const std::string name = entry.path().filename().string();
            if (name.size() > 9 && name.rfind("traj_", 0) == 0 &&
                name.compare(name.size() - 4, 4, ".csv") == 0) {
                const std::string digits = name.substr(5, name.size() - 9);
                if (!digits.empty() &&
                    std::all_of(digits.begin(), digits.end(),
                                [](unsigned char c) { return std::isdigit(c); }))
                    found.emplace_back(std::stoi(digits), entry.path().string());
            }
        }
        std::sort(found.begin(), found.end());
        for (const auto& [id, path] : found) {
            Trajectory t;
            t.target_id = id;
            t.points = load_trajectory(path);
            trajs.push_back(std::move(t));
        }
    }
    if (trajs.empty())
        throw DataError("no traj_<id>.csv files in " + args.traj_dir);

    std::vector<std::pair<int, std::vector<GroundTruthEntry>>> gts;
    if (!args.manifest.empty()) {
        const SequenceManifest m = load_manifest(args.manifest);
        for (std::size_t i = 0; i < m.ground_truth.size(); ++i)
            gts.emplace_back(static_cast<int>(i),
                             load_ground_truth(resolve_path(m, m.ground_truth[i])));
    } else {
        for (std::size_t i = 0; i < args.gt_csvs.size(); ++i)
            gts.emplace_back(static_cast<int>(i), load_ground_truth(args.gt_csvs[i]));
    }
    if (gts.empty())
        throw ConfigError("evaluate needs ground truth (--manifest or --gt)");

    const TimingInfo timing{args.timing_frames, args.timing_seconds};
    const EvalReport rep = report(trajs, gts, timing);

    fs::create_directories(args.out_dir);
    save_report_json(rep, (fs::path(args.out_dir) / "report.json").string());
    save_precision_csv(rep, (fs::path(args.out_dir) / "precision.csv").string());
    save_metrics_csv(rep, (fs::path(args.out_dir) / "metrics.csv").string());
    std::fprintf(stderr, "cle=%s pr20=%s pr50=%s over %zu target(s)\n", fmt(rep.cle).c_str(),
                 fmt(rep.pr20).c_str(), fmt(rep.pr50).c_str(), rep.per_target.size());
}

void cmd_features(const FeaturesArgs& args) {
    const TrackerConfig tcfg =
        args.tracker_config.empty() ? TrackerConfig{} : load_tracker_config(args.tracker_config);
    if (tcfg.feature.kind == FeatureKind::deep_from_file)
        throw ConfigError("deep-from-file maps are inputs, not a computable feature kind; "
                          "pick fhog, raw-channels or fhog-plus-raw");

    const SequenceManifest m = load_manifest(args.manifest);
    fs::create_directories(args.out_dir);
    ThreadPool pool(effective_threads(args.threads));
    pool.parallel_for(m.frames.size(), [&](std::size_t fi) {
        const FrameEntry& fe = m.frames[fi];
        const ChannelStack frame = load_frame(resolve_path(m, fe.path));
        FeatureMap fmap;
        fmap.features = extract_features(frame, tcfg.feature);
        fmap.stride = tcfg.feature.cell_size;
        save_fmap(fmap, (fs::path(args.out_dir) / fmap_name(fe.index)).string());
    });
    log_info("wrote " + std::to_string(m.frames.size()) + " feature maps to " + args.out_dir);
}

void cmd_register(const RegisterArgs& args) {
    SequenceManifest m = load_manifest(args.manifest);
    ThreadPool pool(effective_threads(args.threads));
    RegistrationParams rparams;

    Homography acc;
    ChannelStack prev_gray;
    for (std::size_t fi = 0; fi < m.frames.size(); ++fi) {
        FrameEntry& fe = m.frames[fi];
        const ChannelStack frame = load_frame(resolve_path(m, fe.path));
        ChannelStack gray = registration_gray(frame, args.channel);
        if (fi > 0) {
            rparams.seed = mix_keys(args.seed, static_cast<std::uint64_t>(fe.index));
            const Homography step = register_frames(gray, prev_gray, rparams);
            acc = accumulate(acc, step);
        }
        fe.to_canonical = acc;
        prev_gray = std::move(gray);
        log_info("[register] frame " + std::to_string(fe.index) + " done");
    }

    fs::create_directories(args.out_dir);
    for (FrameEntry& fe : m.frames)
        fe.path = rebased_frame_path(m, fe.path, args.out_dir);
    for (std::string& gt : m.ground_truth)
        gt = rebased_frame_path(m, gt, args.out_dir);
    save_manifest(m, (fs::path(args.out_dir) / "manifest.json").string());
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"multi-ROI kernelized correlation filter tracking for low-frame-rate "
                 "aerial multi-channel imagery"};
    app.require_subcommand(1);

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand("simulate", "render a synthetic sequence from a scenario");
    sim_cmd->add_option("--config", sim_args.spec_path, "scenario JSON")->required();
    sim_cmd->add_option("--out", sim_args.out_dir, "output directory");
    sim_cmd->add_option("--threads", sim_args.threads, "worker threads, 0 = auto");

    TrackArgs track_args;
    std::string track_out;
    std::uint64_t track_seed = 0;
    int track_threads = -1;
    auto* track_cmd = app.add_subcommand("track", "run the tracker over a sequence");
    track_cmd->add_option("--config", track_args.config_path, "run config JSON")->required();
    auto* track_out_opt = track_cmd->add_option("--out", track_out, "override out_dir");
    auto* track_seed_opt = track_cmd->add_option("--seed", track_seed, "override seed");
    auto* track_threads_opt = track_cmd->add_option("--threads", track_threads, "override threads");

    EvaluateArgs eval_args;
    auto* eval_cmd = app.add_subcommand("evaluate", "score trajectories against ground truth");
    eval_cmd->add_option("--traj", eval_args.traj_dir, "directory with traj_<id>.csv")->required();
    eval_cmd->add_option("--manifest", eval_args.manifest, "manifest listing ground-truth CSVs");
    eval_cmd->add_option("--gt", eval_args.gt_csvs, "ground-truth CSV(s), ids by position");
    eval_cmd->add_option("--out", eval_args.out_dir, "output directory");
    eval_cmd->add_option("--frames", eval_args.timing_frames, "frames processed, for the fps field");
    eval_cmd->add_option("--seconds", eval_args.timing_seconds, "wall time, for the fps field");

    FeaturesArgs feat_args;
    auto* feat_cmd = app.add_subcommand("features", "dump per-frame feature maps as FMAP");
    feat_cmd->add_option("--manifest", feat_args.manifest, "sequence manifest")->required();
    feat_cmd->add_option("--config", feat_args.tracker_config, "tracker config JSON");
    feat_cmd->add_option("--out", feat_args.out_dir, "output directory");
    feat_cmd->add_option("--threads", feat_args.threads, "worker threads, 0 = auto");

    RegisterArgs reg_args;
    auto* reg_cmd = app.add_subcommand("register", "estimate to-canonical homographies");
    reg_cmd->add_option("--manifest", reg_args.manifest, "sequence manifest")->required();
    reg_cmd->add_option("--out", reg_args.out_dir, "output directory");
    reg_cmd->add_option("--channel", reg_args.channel, "source channel, -1 = gray view");
    reg_cmd->add_option("--seed", reg_args.seed, "RANSAC seed");
    reg_cmd->add_option("--threads", reg_args.threads, "worker threads, 0 = auto");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    try {
        if (sim_cmd->parsed()) {
            cmd_simulate(sim_args);
        } else if (track_cmd->parsed()) {
            if (*track_out_opt)
                track_args.out_dir = track_out;
            if (*track_seed_opt)
                track_args.seed = track_seed;
            if (*track_threads_opt)
                track_args.threads = track_threads;
            cmd_track(track_args);
        } else if (eval_cmd->parsed()) {
            cmd_evaluate(eval_args);
        } else if (feat_cmd->parsed()) {
            cmd_features(feat_args);
        } else if (reg_cmd->parsed()) {
            cmd_register(reg_args);
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

} // namespace gridkcf
