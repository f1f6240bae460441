#include "scenes.hpp"

#include "sketchplan/sketch.hpp"

#include <doctest.h>

using namespace sketchplan;
using namespace scenes;

namespace {

FeatureVec fv(bool H, bool I, int m, int u, int v) { return FeatureVec{H, I, m, u, v}; }

const SketchRule &rule(const Sketch &s, const std::string &id) {
    for (const SketchRule &r : s.rules)
        if (r.id == id)
            return r;
    throw std::out_of_range(id);
}

/// Blue on the left table, goal the right table, bases in front of both.
struct SortScene {
    Task task = two_tables();
    SampleSet samples;

    explicit SortScene(bool blocker) {
        add(task, "blue", {-1.1, -0.1}, region_of(task, 1));
        if (blocker)
            add(task, "red", {-1.1, -0.25});
        samples = samples_for(task, {task.start.base, Pose2(1.1, -0.75, std::numbers::pi / 2)}, sample_grasps(8, {}),
                              {{}, {Pose2(1.1, -0.1, 0), Pose2(1.0, 0.1, 0), Pose2(1.25, 0.05, 0)}});
    }
};

}  // namespace

TEST_SUITE("sketch") {

TEST_CASE("isolated misplaced object with a free goal") {
    SortScene s(false);
    FeatureEvaluator ev(s.task, s.samples);
    CHECK(ev.blocking_counts(s.task.start, 0) == BlockingCounts{0, 0});
    CHECK(ev.features(s.task.start) == fv(false, false, 1, 0, 0));
}

TEST_CASE("one neighbour in every grasp corridor") {
    SortScene s(true);
    FeatureEvaluator ev(s.task, s.samples);
    CHECK(ev.blocking_counts(s.task.start, 0) == BlockingCounts{1, 0});
    FeatureVec f = ev.features(s.task.start);
    INFO(to_string(f));
    CHECK(f == fv(false, false, 1, 1, 1));
}

TEST_CASE("two objects standing on each other's goal") {
    Task t = two_tables();
    Pose2 p1(1.0, -0.1, 0), p2(1.2, -0.1, 0);
    add(t, "blue", p1.position(), ExactPose{p2, 0.5 * kR});
    add(t, "blue", p2.position(), ExactPose{p1, 0.5 * kR});
    t.start.base = Pose2(1.1, -0.75, std::numbers::pi / 2);
    SampleSet s = samples_for(t, {t.start.base, Pose2(1.9, 0, std::numbers::pi)}, sample_grasps(8, {}),
                              {{Pose2(-1.1, 0, 0)}, {}});
    FeatureEvaluator ev(t, s);
    CHECK(ev.misplaced(t.start).size() == 2);
    CHECK(ev.blocking_counts(t.start, 0).beta >= 1);
    CHECK(ev.blocking_counts(t.start, 1).beta >= 1);
}

TEST_CASE("goal state features") {
    Task t = two_tables();
    add(t, "blue", {1.1, 0}, region_of(t, 1));
    SampleSet s = samples_for(t, {t.start.base}, sample_grasps(4, {}));
    CHECK(compute_features(t.start, s, t) == fv(false, false, 0, 0, 0));
}

TEST_CASE("non-monotonic start features") {
    BenchSpec spec;
    spec.family = Family::NonMonotonic;
    spec.seed = 1;
    Task t = generate(spec);
    SampleSet s = make_samples(t, t.start, SamplingDensity{}, 17);
    FeatureVec f = compute_features(t.start, s, t);
    CHECK_FALSE(f.H);
    CHECK(f.m == 3);
    CHECK(f.u >= 1);
}

TEST_CASE("rule pair checks") {
    Sketch sk = default_sketch();
    const SketchRule &r1 = rule(sk, "r1");
    FeatureVec f = fv(false, false, 2, 0, 1);
    CHECK(conditions_hold(r1, f));
    CHECK(pair_satisfies(r1, f, fv(true, true, 1, 3, 1)));
    CHECK_FALSE(pair_satisfies(r1, f, fv(true, true, 1, 3, 2)));
    CHECK_FALSE(pair_satisfies(r1, f, fv(true, true, 2, 0, 1)));
    const SketchRule &r3 = rule(sk, "r3");
    FeatureVec h = fv(true, false, 2, 1, 1);
    CHECK_FALSE(pair_satisfies(r3, h, fv(true, false, 1, 0, 0)));
    CHECK(pair_satisfies(r3, h, fv(false, false, 3, 1, 1)));
    CHECK_FALSE(pair_satisfies(r3, h, fv(false, false, 1, 0, 0)));
}

TEST_CASE("active rule selection") {
    Sketch sk = default_sketch();
    CHECK(active_rule(sk, fv(false, false, 2, 0, 0)).id == "r1");
    CHECK(active_rule(sk, fv(false, false, 2, 1, 0)).id == "r2");
    CHECK(active_rule(sk, fv(true, false, 2, 1, 0)).id == "r3");
    CHECK(active_rule(sk, fv(true, true, 2, 1, 0)).id == "r4");
    CHECK_THROWS_AS(active_rule(sk, fv(false, false, 0, 0, 0)), NoApplicableRule);
}

TEST_CASE("default sketch terminates") {
    TerminationResult r = check_termination(default_sketch());
    CHECK(r.terminating);
    CHECK(r.residual.empty());
}

TEST_CASE("a rule that decreases nothing does not terminate") {
    TerminationResult r = check_termination(parse_sketch("{m>0} -> {m?}"));
    CHECK_FALSE(r.terminating);
    CHECK(r.residual == std::vector<std::string>{"r1"});
}

TEST_CASE("a two-cycle does not terminate") {
    TerminationResult r = check_termination(parse_sketch("a: {H} -> {!H}\nb: {!H} -> {H}\n"));
    CHECK_FALSE(r.terminating);
    CHECK(r.residual.size() == 2);
}

TEST_CASE("sketch text round trip and errors") {
    Sketch sk = default_sketch();
    std::string text;
    for (const SketchRule &r : sk.rules)
        text += rule_to_string(r) + "\n";
    Sketch back = parse_sketch(text);
    CHECK(back.rules == sk.rules);
    CHECK_THROWS_AS(parse_sketch("{H} -> {!H\n"), SketchError);
    CHECK_THROWS_AS(parse_sketch("{H} -> {!H}\n{H} -> {I}\n"), SketchError);
}

}
