#include "scenes.hpp"

#include "sketchplan/exec.hpp"
#include "sketchplan/rng.hpp"

#include <doctest.h>

using namespace sketchplan;
using namespace scenes;

namespace {

PickMotion pick_from(ObjectId o, Vec2 target, Vec2 base) {
    return PickMotion{o, bearing(base, target), Pose2(base.x, base.y, bearing(base, target))};
}

}  // namespace

TEST_SUITE("exec") {

TEST_CASE("arm workspace is the reach annulus") {
    Task t = one_table();
    ObjectId o = add(t, "red", {0, -0.3});
    const RobotParams &r = t.robot;
    Vec2 target{0, -0.3};
    Vec2 mid{0, target.y - (r.reach_min + r.reach_max) / 2};
    CHECK(in_arm_workspace(t, t.start, pick_from(o, target, mid)));
    Vec2 far{0, target.y - (r.reach_max + 1e-6)};
    CHECK_FALSE(in_arm_workspace(t, t.start, pick_from(o, target, far)));
    Vec2 close{0, target.y - (r.reach_min - 1e-6)};
    CHECK_FALSE(in_arm_workspace(t, t.start, pick_from(o, target, close)));
}

TEST_CASE("lone object passes the corridor test") {
    Task t = one_table();
    ObjectId o = add(t, "red", {0, -0.2});
    Vec2 base{0, -0.7};
    std::uint64_t tests = 0;
    CHECK(inverse_kinematics(t, t.start, pick_from(o, {0, -0.2}, base), 64, &tests));
}

TEST_CASE("ringed object fails for every grasp") {
    Task t = one_table();
    ObjectId o = add(t, "red", {0, 0});
    for (int k = 0; k < 6; ++k) {
        double a = k * std::numbers::pi / 3;
        add(t, "red", {2 * kR * std::cos(a), 2 * kR * std::sin(a)});
    }
    REQUIRE_FALSE(check_state(t, t.start));
    for (int k = 0; k < 36; ++k) {
        double a = k * std::numbers::pi / 18;
        Vec2 base{0.75 * std::cos(a), 0.75 * std::sin(a)};
        if (!base_valid(t, base))
            base = {1.0 * std::cos(a), 1.0 * std::sin(a)};
        CHECK_FALSE(inverse_kinematics(t, t.start, pick_from(o, {0, 0}, base), 64));
    }
}

TEST_CASE("a blocker in the corridor fails the grasp that faces it only") {
    Task t = one_table();
    ObjectId o = add(t, "red", {0, -0.1});
    add(t, "red", {0, -0.25});
    CHECK_FALSE(inverse_kinematics(t, t.start, pick_from(o, {0, -0.1}, {0, -0.7}), 64));
    CHECK(inverse_kinematics(t, t.start, pick_from(o, {0, -0.1}, {0.6, -0.5}), 64));
}

TEST_CASE("move between mutually visible poses is a straight line") {
    Task t = one_table();
    Rng rng(9);
    Pose2 a(-1.0, -1.0, 0), b(1.0, -1.2, 0);
    auto path = plan_base_path(t, a, b, rng, ExecParams{});
    REQUIRE_FALSE(path.empty());
    CHECK(path_length(path) <= 1.01 * distance(a.position(), b.position()));
    CHECK(path.front() == a);
    CHECK(path.back() == b);
}

TEST_CASE("move around a table avoids it") {
    Task t = one_table();
    Rng rng(9);
    Pose2 a(0, -0.8, 0), b(0, 0.8, 0);
    auto path = plan_base_path(t, a, b, rng, ExecParams{});
    REQUIRE_FALSE(path.empty());
    CHECK(path_length(path) > 1.6);
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
        for (int k = 0; k <= 20; ++k) {
            Vec2 p = path[i].position() + (k / 20.0) * (path[i + 1].position() - path[i].position());
            CHECK(base_valid(t, p));
        }
}

TEST_CASE("move onto a table fails") {
    Task t = one_table();
    Rng rng(9);
    PipelineStats stats;
    ConcreteAction mv = MoveBaseMotion{t.start.base, Pose2(0, -0.3, 0)};
    CHECK_FALSE(motion_plan(t, t.start, mv, rng, ExecParams{}, &stats));
    auto v = validate(t, t.start, mv, ValidationMode::Full, stats, ExecParams{}, 1);
    CHECK(v.verdict == Verdict::Infeasible);
    CHECK(v.failed_stage == 3);
}

TEST_CASE("stage 1 failure leaves later stages untouched") {
    Task t = one_table();
    ObjectId o = add(t, "red", {0, 0.35});
    PipelineStats stats;
    auto v = validate(t, t.start, pick_from(o, {0, 0.35}, {0, -2.0}), ValidationMode::Lazy, stats, ExecParams{}, 1);
    CHECK(v.verdict == Verdict::Infeasible);
    CHECK(v.failed_stage == 1);
    CHECK(stats.stages[0].calls == 1);
    CHECK(stats.stages[0].passes == 0);
    CHECK(stats.stages[1].calls == 0);
    CHECK(stats.stages[2].calls == 0);
}

TEST_CASE("full validation of a good pick") {
    Task t = one_table();
    ObjectId o = add(t, "red", {0, -0.2});
    ConcreteAction a = pick_from(o, {0, -0.2}, {0.1, -0.75});
    PipelineStats stats;
    auto v = validate(t, t.start, a, ValidationMode::Full, stats, ExecParams{}, 1);
    REQUIRE(v.verdict == Verdict::Feasible);
    REQUIRE(v.plan);
    CHECK(v.plan->end_state == apply(t, t.start, a));
    CHECK(stats.consistent());
    CHECK(stats.stages[2].calls == 1);
    CHECK(stats.stages[2].passes == 1);
}

TEST_CASE("full feasible implies lazily feasible") {
    BenchSpec spec;
    spec.n_tables = 2;
    spec.clutter = Clutter::Medium;
    spec.seed = 12;
    Task t = generate(spec);
    SampleSet s = make_samples(t, t.start, SamplingDensity{}, 3);
    int feasible = 0;
    for (const GroundAction &g : ground_actions(t.start, s, t)) {
        ConcreteAction a = resolve(s, g);
        PipelineStats full, lazy;
        auto vf = validate(t, t.start, a, ValidationMode::Full, full, ExecParams{}, 5);
        auto vl = validate(t, t.start, a, ValidationMode::Lazy, lazy, ExecParams{}, 5);
        if (vf.verdict == Verdict::Feasible) {
            ++feasible;
            CHECK(vl.verdict == Verdict::ProvisionallyFeasible);
        }
        CHECK(full.consistent());
    }
    CHECK(feasible > 0);
}

TEST_CASE("stats CSV") {
    PipelineStats s;
    s.stages[0] = {10, 5, 0.0};
    s.stages[1] = {5, 2, 0.0};
    s.stages[2] = {2, 2, 0.0};
    std::string csv = stats_csv(s);
    CHECK(csv.rfind("stage,calls,passes,pass_ratio,cumulative_pass_ratio", 0) == 0);
    CHECK(csv.find("\nin_arm_workspace,10,5,0.5,0.5\n") != std::string::npos);
    CHECK(csv.find("\nmotion_plan,2,2,1,0.2\n") != std::string::npos);
}

}
