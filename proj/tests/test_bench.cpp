#include "scenes.hpp"

#include "sketchplan/sketch.hpp"
#include "sketchplan/task_io.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>

using namespace sketchplan;

namespace {

std::map<std::string, int> label_counts(const Task &t) {
    std::map<std::string, int> c;
    for (const MovableObject &o : t.objects)
        ++c[o.label];
    return c;
}

int goal_objects(const Task &t) {
    return static_cast<int>(std::ranges::count_if(t.objects, [](const MovableObject &o) { return has_goal(o.goal); }));
}

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("one goal per colour on one cluttered table") {
    BenchSpec spec;
    spec.n_tables = 1;
    spec.n_goal_objects = 2;
    spec.clutter = Clutter::High;
    Task t = generate(spec);
    auto c = label_counts(t);
    CHECK(t.objects.size() == 4);
    CHECK(c["blue"] == 1);
    CHECK(c["green"] == 1);
    CHECK(c["red"] == 2);
}

TEST_CASE("generation is deterministic") {
    for (Family f : {Family::Sorting, Family::NonMonotonic, Family::Words}) {
        BenchSpec spec;
        spec.family = f;
        spec.seed = 21;
        CHECK(task_to_json(generate(spec)) == task_to_json(generate(spec)));
    }
}

TEST_CASE("sorting starts with every goal object misplaced") {
    for (int tables = 1; tables <= 4; ++tables)
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            BenchSpec spec;
            spec.n_tables = tables;
            spec.n_goal_objects = tables == 4 ? 6 : 2;
            spec.clutter = Clutter::Medium;
            spec.seed = seed;
            Task t = generate(spec);
            CHECK_FALSE(check_state(t, t.start));
            CHECK(static_cast<int>(misplaced_set(t.start, t).size()) == goal_objects(t));
            CHECK(t.tables.size() == static_cast<std::size_t>(tables));
        }
}

TEST_CASE("desk-scale sorting object counts") {
    BenchSpec spec;
    spec.n_tables = 4;
    spec.n_goal_objects = 6;
    spec.n_obstacle_objects = 6;
    spec.clutter = Clutter::Medium;
    Task t = generate(spec);
    CHECK(t.objects.size() == 12);
    CHECK(goal_objects(t) == 6);
    spec.n_tables = 1;
    spec.n_goal_objects = 2;
    spec.clutter = Clutter::High;
    CHECK(generate(spec).objects.size() == 8);
}

TEST_CASE("non-monotonic start") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        BenchSpec spec;
        spec.family = Family::NonMonotonic;
        spec.seed = seed;
        Task t = generate(spec);
        CHECK(t.objects.size() == 10);
        CHECK(goal_objects(t) == 10);
        std::set<ObjectId> greens;
        for (const MovableObject &o : t.objects) {
            if (o.label == "green")
                greens.insert(o.id);
            else
                CHECK(pose_satisfies_goal(t, o, t.start.object_poses.at(o.id)));
        }
        CHECK(misplaced_set(t.start, t) == greens);
        SampleSet s = make_samples(t, t.start, SamplingDensity{}, seed);
        CHECK(compute_features(t.start, s, t).u >= 1);
    }
}

TEST_CASE("words TAMP") {
    BenchSpec spec;
    spec.family = Family::Words;
    spec.word = "TAMP";
    spec.seed = 4;
    Task t = generate(spec);
    CHECK(t.objects.size() == 11);
    CHECK(t.word == "TAMP");
    int goals = goal_objects(t);
    CHECK(goals >= 4);
    CHECK(goals <= 5);
    for (char ch : std::string("TAMP"))
        CHECK(std::ranges::any_of(t.objects, [&](const MovableObject &o) { return o.label == std::string(1, ch); }));
    CHECK_FALSE(is_goal(t.start, t));
}

TEST_CASE("words ROBOT has two O blocks") {
    BenchSpec spec;
    spec.family = Family::Words;
    spec.word = "ROBOT";
    Task t = generate(spec);
    CHECK(label_counts(t)["O"] == 2);
    CHECK(goal_objects(t) == 5);
}

TEST_CASE("labels and clutter parse") {
    CHECK(clutter_from_string("medium") == Clutter::Medium);
    CHECK(to_string(Clutter::High) == "high");
    CHECK_THROWS(clutter_from_string("dense"));
    CHECK(clutter_spacing(Clutter::Low) > clutter_spacing(Clutter::High));
}

}
