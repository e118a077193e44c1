#include "gridkcf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "gridkcf/errors.hpp"

using ordered_json = nlohmann::ordered_json;

namespace gridkcf {

namespace {

// Center errors on the common frame set, in trajectory frame order.
std::vector<double> common_errors(const Trajectory& traj,
                                  const std::vector<GroundTruthEntry>& gt) {
    std::map<int, const GroundTruthEntry*> by_frame;
    for (const auto& e : gt)
        by_frame[e.frame] = &e;
    std::vector<double> errs;
    for (const auto& p : traj.points) {
        auto it = by_frame.find(p.frame);
        if (it == by_frame.end())
            continue;
        errs.push_back(std::hypot(p.cx - it->second->cx, p.cy - it->second->cy));
    }
    if (errs.empty())
        throw ContractError("eval: trajectory for target " + std::to_string(traj.target_id) +
                            " shares no frames with the ground truth");
    return errs;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write " + path);
    out << text;
}

} // namespace

double cle(const Trajectory& traj, const std::vector<GroundTruthEntry>& gt) {
    const std::vector<double> errs = common_errors(traj, gt);
    double sum = 0.0;
    for (double e : errs)
        sum += e;
    return sum / static_cast<double>(errs.size());
}

std::vector<double> precision_curve(const Trajectory& traj,
                                    const std::vector<GroundTruthEntry>& gt,
                                    int max_threshold) {
    const std::vector<double> errs = common_errors(traj, gt);
    std::vector<double> curve(static_cast<std::size_t>(max_threshold) + 1, 0.0);
    for (int t = 0; t <= max_threshold; ++t) {
        std::size_t hits = 0;
        for (double e : errs)
            if (e <= static_cast<double>(t))
                ++hits;
        curve[static_cast<std::size_t>(t)] =
            static_cast<double>(hits) / static_cast<double>(errs.size());
    }
    return curve;
}

TargetScore score_target(const Trajectory& traj, const std::vector<GroundTruthEntry>& gt,
                         int max_threshold) {
    TargetScore s;
    s.target_id = traj.target_id;
    s.frames = common_errors(traj, gt).size();
    s.cle = cle(traj, gt);
    s.precision = precision_curve(traj, gt, max_threshold);
    s.pr20 = max_threshold >= 20 ? s.precision[20] : 0.0;
    s.pr50 = max_threshold >= 50 ? s.precision[50] : 0.0;
    return s;
}

EvalReport report(const std::vector<Trajectory>& trajs,
                  const std::vector<std::pair<int, std::vector<GroundTruthEntry>>>& gts,
                  const TimingInfo& timing) {
    if (trajs.empty())
        throw ContractError("eval: no trajectories to score");

    std::map<int, const std::vector<GroundTruthEntry>*> gt_by_id;
    for (const auto& [id, rows] : gts)
        gt_by_id[id] = &rows;

    std::string missing;
    for (const auto& t : trajs)
        if (!gt_by_id.count(t.target_id))
            missing += " " + std::to_string(t.target_id);
    if (!missing.empty())
        throw ContractError("eval: no ground truth for target id(s):" + missing);
    std::map<int, bool> seen;
    for (const auto& t : trajs)
        seen[t.target_id] = true;
    for (const auto& [id, rows] : gts)
        if (!seen.count(id))
            missing += " " + std::to_string(id);
    if (!missing.empty())
        throw ContractError("eval: no trajectory for target id(s):" + missing);

    EvalReport rep;
    for (const auto& t : trajs)
        rep.per_target.push_back(score_target(t, *gt_by_id.at(t.target_id)));

    const std::size_t n = rep.per_target.size();
    rep.precision.assign(rep.per_target.front().precision.size(), 0.0);
    for (const auto& s : rep.per_target) {
        rep.cle += s.cle;
        rep.frames_evaluated += s.frames;
        for (std::size_t i = 0; i < rep.precision.size(); ++i)
            rep.precision[i] += s.precision[i];
    }
    rep.cle /= static_cast<double>(n);
    for (double& v : rep.precision)
        v /= static_cast<double>(n);
    rep.pr20 = rep.precision.size() > 20 ? rep.precision[20] : 0.0;
    rep.pr50 = rep.precision.size() > 50 ? rep.precision[50] : 0.0;
    rep.fps = timing.seconds > 0.0 ? static_cast<double>(timing.frames) / timing.seconds : 0.0;
    return rep;
}

void save_report_json(const EvalReport& rep, const std::string& path) {
    ordered_json j;
    j["schema"] = "gridkcf-report";
    j["version"] = 1;
    j["cle"] = rep.cle;
    j["pr20"] = rep.pr20;
    j["pr50"] = rep.pr50;
    j["fps"] = rep.fps;
    j["frames_evaluated"] = rep.frames_evaluated;
    j["precision"] = rep.precision;
    ordered_json targets = ordered_json::array();
    for (const auto& s : rep.per_target) {
        ordered_json t;
        t["id"] = s.target_id;
        t["frames"] = s.frames;
        t["cle"] = s.cle;
        t["pr20"] = s.pr20;
        t["pr50"] = s.pr50;
        t["precision"] = s.precision;
        targets.push_back(std::move(t));
    }
    j["targets"] = std::move(targets);
    write_text(path, j.dump(2) + "\n");
}

void save_precision_csv(const EvalReport& rep, const std::string& path) {
    std::ostringstream ss;
    ss << "threshold,precision\n";
    for (std::size_t t = 0; t < rep.precision.size(); ++t)
        ss << t << ',' << format_double(rep.precision[t]) << '\n';
    write_text(path, ss.str());
}

void save_metrics_csv(const EvalReport& rep, const std::string& path) {
    std::ostringstream ss;
    ss << "metric,value\n";
    ss << "cle," << format_double(rep.cle) << '\n';
    ss << "pr20," << format_double(rep.pr20) << '\n';
    ss << "pr50," << format_double(rep.pr50) << '\n';
    ss << "fps," << format_double(rep.fps) << '\n';
    ss << "frames_evaluated," << rep.frames_evaluated << '\n';
    write_text(path, ss.str());
}

} // namespace gridkcf
