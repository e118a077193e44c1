#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridkcf/errors.hpp"
#include "gridkcf/eval.hpp"

#include "test_util.hpp"

using namespace gridkcf;

namespace {

// Ground truth parked at the origin on frames 0..n-1; the trajectory misses it
// by the given per-frame distances. Keeps error magnitudes explicit.
std::vector<GroundTruthEntry> origin_gt(int n) {
    std::vector<GroundTruthEntry> gt;
    for (int f = 0; f < n; ++f) {
        GroundTruthEntry e;
        e.frame = f;
        e.cx = 0.0;
        e.cy = 0.0;
        e.w = 10.0;
        e.h = 10.0;
        gt.push_back(e);
    }
    return gt;
}

Trajectory traj_with_errors(int id, const std::vector<double>& errors) {
    Trajectory t;
    t.target_id = id;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        TrajectoryPoint p;
        p.frame = static_cast<int>(i);
        p.cx = errors[i]; // offset along x only, so error == cx
        p.cy = 0.0;
        t.points.push_back(p);
    }
    return t;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_SUITE("eval") {

TEST_CASE("center location error averages euclidean distances on common frames") {
    const auto gt = origin_gt(3);

    CHECK(cle(traj_with_errors(0, {0.0, 0.0, 0.0}), gt) == doctest::Approx(0.0));

    Trajectory diag;
    diag.target_id = 0;
    diag.points.push_back({0, 3.0, 4.0, 0.0, false});
    CHECK(cle(diag, gt) == doctest::Approx(5.0));

    CHECK(cle(traj_with_errors(0, {0.0, 10.0, 30.0}), gt) == doctest::Approx(40.0 / 3.0));

    // frames only one side knows about are ignored, not scored as misses
    Trajectory sparse = traj_with_errors(0, {0.0, 10.0});
    sparse.points.push_back({17, 999.0, 999.0, 0.0, false});
    CHECK(cle(sparse, gt) == doctest::Approx(5.0));

    Trajectory disjoint;
    disjoint.target_id = 4;
    disjoint.points.push_back({50, 0.0, 0.0, 0.0, false});
    CHECK_THROWS_WITH_AS(cle(disjoint, gt),
                         "eval: trajectory for target 4 shares no frames with the ground truth",
                         ContractError);
}

TEST_CASE("coasting markers do not exempt a frame from scoring") {
    const auto gt = origin_gt(2);
    Trajectory t;
    t.target_id = 0;
    t.points.push_back({0, 0.0, 0.0, 8.0, false});
    t.points.push_back({1, 10.0, 0.0, 0.0, true});
    CHECK(cle(t, gt) == doctest::Approx(5.0));
}

TEST_CASE("precision curve counts errors at or under each integer threshold") {
    const auto gt = origin_gt(3);
    const auto curve = precision_curve(traj_with_errors(0, {0.0, 10.0, 30.0}), gt);
    REQUIRE(curve.size() == 51);
    CHECK(curve[0] == doctest::Approx(1.0 / 3.0));
    CHECK(curve[9] == doctest::Approx(1.0 / 3.0));
    CHECK(curve[10] == doctest::Approx(2.0 / 3.0)); // threshold is inclusive
    CHECK(curve[20] == doctest::Approx(2.0 / 3.0));
    CHECK(curve[29] == doctest::Approx(2.0 / 3.0));
    CHECK(curve[30] == doctest::Approx(1.0));
    CHECK(curve[50] == doctest::Approx(1.0));
    for (std::size_t t = 1; t < curve.size(); ++t)
        CHECK(curve[t] >= curve[t - 1]);

    const auto perfect = precision_curve(traj_with_errors(0, {0.0, 0.0, 0.0}), gt);
    for (double v : perfect)
        CHECK(v == doctest::Approx(1.0));

    CHECK(precision_curve(traj_with_errors(0, {0.0}), gt, 5).size() == 6);
}

TEST_CASE("per-target score bundles frame count, cle and curve points") {
    const auto gt = origin_gt(4);
    const TargetScore s = score_target(traj_with_errors(3, {0.0, 5.0, 25.0, 45.0}), gt);
    CHECK(s.target_id == 3);
    CHECK(s.frames == 4);
    CHECK(s.cle == doctest::Approx(75.0 / 4.0));
    CHECK(s.pr20 == doctest::Approx(0.5));
    CHECK(s.pr50 == doctest::Approx(1.0));
    REQUIRE(s.precision.size() == 51);
    CHECK(s.pr20 == doctest::Approx(s.precision[20]));
    CHECK(s.pr50 == doctest::Approx(s.precision[50]));
}

TEST_CASE("dataset curve is the unweighted mean across targets") {
    // equal-length sequences: averaging curves and pooling all frames agree,
    // which pins the aggregation against an independent recomputation
    const std::vector<std::vector<double>> errs{
        {0.0, 10.0, 30.0, 4.0}, {7.0, 7.0, 45.0, 2.0}, {0.0, 0.0, 18.0, 33.0}};
    std::vector<Trajectory> trajs;
    std::vector<std::pair<int, std::vector<GroundTruthEntry>>> gts;
    for (int i = 0; i < 3; ++i) {
        trajs.push_back(traj_with_errors(i, errs[static_cast<std::size_t>(i)]));
        gts.emplace_back(i, origin_gt(4));
    }
    const EvalReport rep = report(trajs, gts, {12, 6.0});
    CHECK(rep.per_target.size() == 3);
    CHECK(rep.frames_evaluated == 12);
    CHECK(rep.fps == doctest::Approx(2.0));

    for (int t = 0; t <= 50; ++t) {
        std::size_t hits = 0;
        double sum = 0.0;
        for (const auto& seq : errs)
            for (double e : seq) {
                hits += e <= t ? 1u : 0u;
                sum += e;
            }
        CHECK(rep.precision[static_cast<std::size_t>(t)] ==
              doctest::Approx(static_cast<double>(hits) / 12.0));
        if (t == 0)
            CHECK(rep.cle == doctest::Approx(sum / 12.0));
    }
    CHECK(rep.pr20 == doctest::Approx(rep.precision[20]));
    CHECK(rep.pr50 == doctest::Approx(rep.precision[50]));

    // unequal lengths: the mean of curves is not the pooled curve, and the
    // aggregation must take the mean
    std::vector<Trajectory> uneven{traj_with_errors(0, {0.0, 0.0}),
                                   traj_with_errors(1, std::vector<double>(8, 30.0))};
    std::vector<std::pair<int, std::vector<GroundTruthEntry>>> uneven_gt{
        {0, origin_gt(2)}, {1, origin_gt(8)}};
    const EvalReport rep2 = report(uneven, uneven_gt, {10, 1.0});
    CHECK(rep2.precision[0] == doctest::Approx(0.5));  // pooled would say 0.2
    CHECK(rep2.precision[29] == doctest::Approx(0.5));
    CHECK(rep2.precision[30] == doctest::Approx(1.0));
    CHECK(rep2.cle == doctest::Approx(15.0)); // (0 + 30) / 2, not 240 / 10
    CHECK(rep2.frames_evaluated == 10);
}

TEST_CASE("scores are invariant under a rigid shift of both inputs") {
    auto gt = origin_gt(3);
    Trajectory t = traj_with_errors(0, {1.0, 12.0, 26.0});
    const double base = cle(t, gt);
    const auto base_curve = precision_curve(t, gt);
    for (auto& e : gt) {
        e.cx += 101.5;
        e.cy -= 44.25;
    }
    for (auto& p : t.points) {
        p.cx += 101.5;
        p.cy -= 44.25;
    }
    CHECK(cle(t, gt) == doctest::Approx(base));
    const auto moved_curve = precision_curve(t, gt);
    for (std::size_t i = 0; i < base_curve.size(); ++i)
        CHECK(moved_curve[i] == doctest::Approx(base_curve[i]));
}

TEST_CASE("report rejects unmatched ids in either direction") {
    std::vector<std::pair<int, std::vector<GroundTruthEntry>>> gts{{0, origin_gt(2)}};

    CHECK_THROWS_WITH_AS(report({}, gts, {0, 0.0}), "eval: no trajectories to score",
                         ContractError);
    CHECK_THROWS_WITH_AS(report({traj_with_errors(7, {0.0})}, gts, {0, 0.0}),
                         "eval: no ground truth for target id(s): 7", ContractError);
    CHECK_THROWS_WITH_AS(report({traj_with_errors(0, {0.0, 0.0})},
                                {{0, origin_gt(2)}, {9, origin_gt(2)}}, {0, 0.0}),
                         "eval: no trajectory for target id(s): 9", ContractError);
}

TEST_CASE("throughput comes straight from the timing info") {
    const std::vector<Trajectory> trajs{traj_with_errors(0, {0.0, 1.0})};
    const std::vector<std::pair<int, std::vector<GroundTruthEntry>>> gts{{0, origin_gt(2)}};

    const EvalReport rep = report(trajs, gts, {157, 110.5});
    CHECK(rep.fps == doctest::Approx(157.0 / 110.5));
    CHECK(std::abs(rep.fps - 1.42) < 0.001);

    CHECK(report(trajs, gts, {157, 0.0}).fps == doctest::Approx(0.0));
}

TEST_CASE("report writers emit the documented layouts") {
    const std::vector<Trajectory> trajs{traj_with_errors(0, {0.0, 10.0, 30.0}),
                                        traj_with_errors(1, {5.0, 5.0, 5.0})};
    const std::vector<std::pair<int, std::vector<GroundTruthEntry>>> gts{{0, origin_gt(3)},
                                                                         {1, origin_gt(3)}};
    const EvalReport rep = report(trajs, gts, {6, 3.0});
    TempDir dir("eval_out");

    save_report_json(rep, dir.str("report.json"));
    const auto j = nlohmann::json::parse(slurp(dir.str("report.json")));
    CHECK(j.at("schema") == "gridkcf-report");
    CHECK(j.at("version") == 1);
    CHECK(j.at("cle").get<double>() == doctest::Approx(rep.cle));
    CHECK(j.at("pr20").get<double>() == doctest::Approx(rep.pr20));
    CHECK(j.at("fps").get<double>() == doctest::Approx(2.0));
    CHECK(j.at("frames_evaluated") == 6);
    REQUIRE(j.at("precision").size() == 51);
    REQUIRE(j.at("targets").size() == 2);
    CHECK(j.at("targets")[1].at("id") == 1);
    CHECK(j.at("targets")[1].at("cle").get<double>() == doctest::Approx(5.0));

    save_precision_csv(rep, dir.str("precision.csv"));
    std::istringstream pcsv(slurp(dir.str("precision.csv")));
    std::string line;
    REQUIRE(std::getline(pcsv, line));
    CHECK(line == "threshold,precision");
    int rows = 0;
    while (std::getline(pcsv, line)) {
        if (rows == 20) {
            // target 0 contributes 2/3 at t=20, target 1 contributes 1
            CHECK(line == "20," + format_double(rep.precision[20]));
        }
        ++rows;
    }
    CHECK(rows == 51);

    save_metrics_csv(rep, dir.str("metrics.csv"));
    const std::string mcsv = slurp(dir.str("metrics.csv"));
    CHECK(mcsv.rfind("metric,value\n", 0) == 0);
    CHECK(mcsv.find("cle," + format_double(rep.cle) + "\n") != std::string::npos);
    CHECK(mcsv.find("fps,2\n") != std::string::npos);
    CHECK(mcsv.find("frames_evaluated,6\n") != std::string::npos);
}

} // TEST_SUITE
