#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridkcf/config.hpp"
#include "gridkcf/eval.hpp"

namespace gridkcf {

struct SimulateArgs {
    std::string spec_path;
    std::string out_dir = "out";
    int threads = 0;
};

struct TrackArgs {
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

struct EvaluateArgs {
    std::string traj_dir;
    std::string manifest;              // ground-truth source (lists the CSVs), or
    std::vector<std::string> gt_csvs;  // explicit CSVs, target ids by position
    std::string out_dir = "out";
    std::size_t timing_frames = 0; // optional wall-clock figures for the fps field
    double timing_seconds = 0.0;
};

struct FeaturesArgs {
    std::string manifest;
    std::string tracker_config; // empty = defaults (fhog, cell 4)
    std::string out_dir = "out";
    int threads = 0;
};

struct RegisterArgs {
    std::string manifest;
    std::string out_dir = "out";
    int channel = -1; // -1 = gray view over all channels
    std::uint64_t seed = 1;
    int threads = 0;
};

// In-process track run: loads everything rc references, tracks every
// ground-truth target, writes traj_<id>.csv per target into rc.out_dir and
// returns the trajectories plus timing/stats for callers that want them.
// Wall-clock figures go to stderr only, keeping the on-disk artifacts
// byte-reproducible.
struct TrackRunResult {
    std::vector<Trajectory> trajectories;
    std::vector<TrackerStats> per_target;
    std::size_t frames = 0;
    double seconds = 0.0;
};

TrackRunResult run_track(const RunConfig& rc);

void cmd_simulate(const SimulateArgs& args);
void cmd_track(const TrackArgs& args);
void cmd_evaluate(const EvaluateArgs& args);
void cmd_features(const FeaturesArgs& args);
void cmd_register(const RegisterArgs& args);

// Parses argv and dispatches. Exit codes: 0 success, 2 config/usage error,
// 3 data error, 1 anything else.
int run_cli(int argc, const char* const* argv);

} // namespace gridkcf
