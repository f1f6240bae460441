#include "scenes.hpp"

#include "sketchplan/task_io.hpp"

#include <doctest.h>

using namespace sketchplan;
using namespace scenes;

TEST_SUITE("world") {

TEST_CASE("placement_free on an empty table") {
    Task t = one_table();
    CHECK(placement_free(t, t.start, t.tables[0], Pose2(0, 0, 0), kR));
}

TEST_CASE("placement_free rejects a disc crossing the table edge") {
    Task t = one_table();
    CHECK_FALSE(placement_free(t, t.start, t.tables[0], Pose2(0.5 - kR / 2, 0, 0), kR));
    CHECK(placement_free(t, t.start, t.tables[0], Pose2(0.5 - kR, 0, 0), kR));
}

TEST_CASE("placement_free against a neighbour just closer than touching") {
    Task t = one_table();
    add(t, "red", {0, 0});
    const double eps = 1e-4;
    CHECK_FALSE(placement_free(t, t.start, t.tables[0], Pose2(2 * kR - eps, 0, 0), kR));
    CHECK(placement_free(t, t.start, t.tables[0], Pose2(2 * kR + eps, 0, 0), kR));
    CHECK(placement_free(t, t.start, t.tables[0], Pose2(2 * kR - eps, 0, 0), kR, ObjectId{0}));
}

TEST_CASE("move base changes only the base") {
    Task t = one_table();
    add(t, "red", {0.1, 0.1});
    Pose2 to(0.8, 0, std::numbers::pi);
    WorldState s = apply(t, t.start, MoveBaseMotion{t.start.base, to});
    CHECK(s.base == to);
    CHECK(s.object_poses == t.start.object_poses);
    CHECK_FALSE(s.held);
}

TEST_CASE("pick then place at the same pose restores the state up to the base") {
    Task t = one_table();
    ObjectId o = add(t, "red", {0.1, 0.1});
    Pose2 b1(0, -0.6, 0), b2(0.3, -0.6, 0);
    WorldState held = apply(t, t.start, PickMotion{o, 0.5, b1});
    REQUIRE(held.held);
    CHECK(held.held->grasp == 0.5);
    CHECK_FALSE(held.object_poses.contains(o));
    WorldState back = apply(t, held, PlaceMotion{o, t.start.object_poses.at(o), 0, 0, b2});
    CHECK(back.object_poses == t.start.object_poses);
    CHECK_FALSE(back.held);
    CHECK(back.base == b2);
}

TEST_CASE("place puts the object at the placement") {
    Task t = one_table();
    ObjectId o = add(t, "red", {0.1, 0.1});
    WorldState held = apply(t, t.start, PickMotion{o, 0.0, t.start.base});
    Pose2 p(-0.2, 0.05, 0);
    REQUIRE(placement_free(t, held, t.tables[0], p, kR));
    WorldState s = apply(t, held, PlaceMotion{o, p, 0, 0, t.start.base});
    CHECK(s.object_poses.at(o) == p);
    CHECK_FALSE(s.held);
}

TEST_CASE("apply rejects broken invariants") {
    Task t = one_table();
    ObjectId a = add(t, "red", {0.1, 0.1});
    add(t, "red", {0.2, 0.1});
    WorldState held = apply(t, t.start, PickMotion{a, 0.0, t.start.base});
    CHECK_THROWS_AS(apply(t, held, PickMotion{1, 0.0, t.start.base}), InvariantViolation);
    CHECK_THROWS_AS(apply(t, held, PlaceMotion{a, Pose2(0.2, 0.12, 0), 0, 0, t.start.base}), InvariantViolation);
    CHECK_THROWS_AS(apply(t, t.start, MoveBaseMotion{t.start.base, Pose2(0, 0, 0)}), InvariantViolation);
}

TEST_CASE("sorting goal state has no misplaced objects") {
    Task t = two_tables();
    add(t, "blue", {-1.1, 0}, region_of(t, 0));
    add(t, "green", {1.1, 0}, region_of(t, 1));
    add(t, "red", {-1.0, 0.2});
    CHECK(misplaced_set(t.start, t, {}).empty());
    CHECK(is_goal(t.start, t));
}

TEST_CASE("non-monotonic start misplaces exactly the greens") {
    BenchSpec spec;
    spec.family = Family::NonMonotonic;
    spec.seed = 3;
    Task t = generate(spec);
    std::set<ObjectId> greens;
    for (const MovableObject &o : t.objects)
        if (o.label == "green")
            greens.insert(o.id);
    CHECK(greens.size() == 3);
    CHECK(misplaced_set(t.start, t) == greens);
    CHECK_FALSE(is_goal(t.start, t));
}

TEST_CASE("holding an object is never a goal state") {
    Task t = one_table();
    ObjectId o = add(t, "red", {0.1, 0.1});
    CHECK(is_goal(t.start, t));
    WorldState held = apply(t, t.start, PickMotion{o, 0.0, t.start.base});
    CHECK(misplaced_set(held, t).empty());
    CHECK_FALSE(is_goal(held, t));
}

Task word_scene(double table_half_x) {
    Task t = one_table();
    t.family = Family::Words;
    t.word = "TAMP";
    t.tables[0].rect.half = {table_half_x, 0.2};
    return t;
}

TEST_CASE("word prefix on an empty table is empty") {
    Task t = word_scene(0.4);
    CHECK(words_valid_prefix(t.start, t).empty());
}

TEST_CASE("word prefix with T and A at pitch") {
    Task t = word_scene(0.4);
    const double pitch = 2.5 * kR;
    ObjectId T = add(t, "T", {-0.2, 0}, RelativeWord{0});
    ObjectId A = add(t, "A", {-0.2 + pitch, 0}, RelativeWord{1});
    add(t, "M", {0.2, 0.12}, RelativeWord{2});
    add(t, "P", {0.2, -0.12}, RelativeWord{3});
    auto prefix = words_valid_prefix(t.start, t);
    REQUIRE(prefix.size() == 2);
    CHECK(prefix[0] == WordSlotAssignment{T, 0});
    CHECK(prefix[1] == WordSlotAssignment{A, 1});
    std::set<ObjectId> mis = misplaced_set(t.start, t);
    CHECK(mis == std::set<ObjectId>{2, 3});
}

TEST_CASE("word prefix whose last slot would overhang is rejected") {
    Task t = word_scene(0.4);
    const double pitch = 2.5 * kR;
    // anchor so close to the right edge that slot 3 falls off the table
    double x0 = 0.4 - 2 * kR - pitch;
    add(t, "T", {x0, 0}, RelativeWord{0});
    add(t, "A", {x0 + pitch, 0}, RelativeWord{1});
    CHECK(words_valid_prefix(t.start, t).size() < 2);
}

TEST_CASE("repeated letters may fill either slot") {
    Task t = word_scene(0.45);
    t.word = "ROBOT";
    const double pitch = 2.5 * kR;
    double x0 = -0.3;
    add(t, "R", {x0, 0}, RelativeWord{0});
    ObjectId o1 = add(t, "O", {x0 + 3 * pitch, 0}, RelativeWord{1});
    add(t, "B", {x0 + 2 * pitch, 0}, RelativeWord{2});
    ObjectId o2 = add(t, "O", {x0 + pitch, 0}, RelativeWord{1});
    add(t, "T", {x0 + 4 * pitch, 0}, RelativeWord{4});
    auto prefix = words_valid_prefix(t.start, t);
    REQUIRE(prefix.size() == 5);
    CHECK(prefix[1].object == o2);
    CHECK(prefix[3].object == o1);
    CHECK(is_goal(t.start, t));
}

TEST_CASE("task JSON round trip") {
    BenchSpec spec;
    spec.family = Family::Sorting;
    spec.n_tables = 3;
    spec.seed = 5;
    Task t = generate(spec);
    Task back = task_from_json(task_to_json(t));
    CHECK(task_to_json(back) == task_to_json(t));
    CHECK(back.start == t.start);
}

TEST_CASE("malformed task JSON reports the line") {
    try {
        task_from_json("{\n  \"format\": \"sketchplan-task/1\",\n  oops\n}");
        FAIL("expected InputError");
    } catch (const InputError &e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

}
