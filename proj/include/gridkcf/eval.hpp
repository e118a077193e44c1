#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gridkcf/io.hpp"

namespace gridkcf {

struct Trajectory {
    int target_id = 0;
    std::vector<TrajectoryPoint> points; // frame indices strictly increasing
};

// Per-target scores over the frames both the trajectory and the ground truth
// cover. The precision curve holds 51 values at integer thresholds 0..50 px.
struct TargetScore {
    int target_id = 0;
    std::size_t frames = 0;
    double cle = 0.0;
    double pr20 = 0.0, pr50 = 0.0;
    std::vector<double> precision;
};

struct TimingInfo {
    std::size_t frames = 0;
    double seconds = 0.0;
};

struct EvalReport {
    std::vector<TargetScore> per_target;
    // dataset level: unweighted mean over targets, not frame-pooled
    double cle = 0.0;
    double pr20 = 0.0, pr50 = 0.0;
    std::vector<double> precision;
    double fps = 0.0;
    std::size_t frames_evaluated = 0;
};

// Mean Euclidean distance between predicted and true centers over common
// frames. Disjoint frame sets are a caller bug.
double cle(const Trajectory& traj, const std::vector<GroundTruthEntry>& gt);

// precision[t] = fraction of common frames with center error <= t px,
// t = 0..max_threshold inclusive.
std::vector<double> precision_curve(const Trajectory& traj,
                                    const std::vector<GroundTruthEntry>& gt,
                                    int max_threshold = 50);

TargetScore score_target(const Trajectory& traj, const std::vector<GroundTruthEntry>& gt,
                         int max_threshold = 50);

// Pairs trajectories with ground truth by target id (both ways; anything
// unmatched is reported in the error), scores each, and averages unweighted.
EvalReport report(const std::vector<Trajectory>& trajs,
                  const std::vector<std::pair<int, std::vector<GroundTruthEntry>>>& gts,
                  const TimingInfo& timing);

void save_report_json(const EvalReport& rep, const std::string& path);
void save_precision_csv(const EvalReport& rep, const std::string& path); // threshold,precision
void save_metrics_csv(const EvalReport& rep, const std::string& path);   // metric,value

} // namespace gridkcf
