#include "scenes.hpp"

#include "sketchplan/exec.hpp"
#include "sketchplan/rng.hpp"

#include <doctest.h>

#include <algorithm>

using namespace sketchplan;
using namespace scenes;

TEST_SUITE("sampler") {

TEST_CASE("k = 0 returns the fixed poses") {
    Task t = one_table();
    Rng rng(1);
    std::vector<Pose2> fixed{Pose2(0.1, 0.1, 0), Pose2(-0.2, 0.0, 0)};
    CHECK(sample_placements(t.tables[0], 0, fixed, {}, kR, rng) == fixed);
}

TEST_CASE("maximin pick is the best of its batch") {
    Task t = one_table();
    Rng rng(7);
    SamplingTrace trace;
    auto out = sample_placements(t.tables[0], 1, {Pose2(0, 0, 0)}, {}, kR, rng, nullptr, &trace);
    REQUIRE(out.size() == 2);
    REQUIRE(trace.batches.size() == 1);
    const auto &b = trace.batches[0];
    CHECK(b.candidates.size() == static_cast<std::size_t>(kMaximinBatch));
    CHECK(*std::max_element(b.scores.begin(), b.scores.end()) == b.scores[b.chosen]);
    CHECK(out[1] == b.candidates[b.chosen]);
    // far from the centre, towards a corner region
    CHECK(distance(out[1].position(), {0, 0}) > 0.3);
}

TEST_CASE("a packed table exhausts sampling") {
    Table tiny{0, Rect{{0, 0}, {0.05, 0.05}}};
    Rng rng(3);
    std::vector<Disc> blockers{{{0, 0}, 0.2}};
    CHECK_THROWS_AS(sample_placements(tiny, 1, {}, blockers, kR, rng), SamplingExhausted);
}

TEST_CASE("sampled placements are collision free and on the table") {
    Task t = one_table();
    Rng rng(11);
    auto out = sample_placements(t.tables[0], 12, {}, {}, kR, rng);
    CHECK(out.size() == 12);
    for (std::size_t i = 0; i < out.size(); ++i) {
        CHECK(t.tables[0].rect.contains(out[i].position(), kR - 1e-9));
        for (std::size_t j = i + 1; j < out.size(); ++j)
            CHECK(distance(out[i].position(), out[j].position()) >= 2 * kR - 1e-9);
    }
}

TEST_CASE("k = 1 bases is the start base") {
    Task t = one_table();
    Rng rng(2);
    std::vector<Pose2> anchors{t.start.base};
    auto out = sample_bases(t, 1, anchors, rng);
    REQUIRE(out.size() == 1);
    CHECK(out[0] == t.start.base);
}

TEST_CASE("bases stay in the reachable band and cover both tables") {
    Task t = two_tables();
    Rng rng(5);
    std::vector<Pose2> anchors{t.start.base};
    auto out = sample_bases(t, 8, anchors, rng);
    CHECK(out.size() == 8);
    std::vector<bool> covered(t.tables.size(), false);
    for (const Pose2 &b : out) {
        double nearest = 1e9;
        for (const Table &tb : t.tables) {
            double d = tb.rect.distance_to(b.position());
            nearest = std::min(nearest, d);
            if (d <= t.robot.reach_max)
                covered[static_cast<std::size_t>(tb.id)] = true;
        }
        CHECK(nearest <= t.robot.reach_max);
        CHECK(base_valid(t, b.position()));
    }
    CHECK(covered[0]);
    CHECK(covered[1]);
}

TEST_CASE("roadmap over one base has no edges") {
    std::vector<Pose2> b{Pose2(0, 0, 0)};
    auto [adj, d] = build_roadmap(b);
    REQUIRE(adj.size() == 1);
    CHECK(adj[0].empty());
}

TEST_CASE("roadmap over three collinear bases") {
    const double s = 0.5;
    std::vector<Pose2> b{Pose2(0, 0, 0), Pose2(s, 0, 0), Pose2(2 * s, 0, 0)};
    auto [adj, d] = build_roadmap(b);
    CHECK(d == doctest::Approx(2 * s));
    CHECK(std::ranges::find(adj[0], 1) != adj[0].end());
    CHECK(std::ranges::find(adj[1], 2) != adj[1].end());
    bool long_edge = std::ranges::find(adj[0], 2) != adj[0].end();
    CHECK(long_edge == (2 * s <= d));
}

TEST_CASE("roadmap is connected even with a far outlier") {
    std::vector<Pose2> b{Pose2(0, 0, 0), Pose2(0.1, 0, 0), Pose2(0.2, 0, 0), Pose2(2.5, 0, 0)};
    auto [adj, d] = build_roadmap(b);
    std::vector<bool> seen(b.size(), false);
    std::vector<int> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int w : adj[static_cast<std::size_t>(v)])
            if (!seen[static_cast<std::size_t>(w)]) {
                seen[static_cast<std::size_t>(w)] = true;
                stack.push_back(w);
            }
    }
    CHECK(std::ranges::all_of(seen, [](bool x) { return x; }));
    CHECK(d >= 2.3);
}

TEST_CASE("ground actions with an empty hand") {
    Task t = one_table();
    add(t, "red", {0.1, 0.1});
    add(t, "red", {-0.1, 0.1});
    SampleSet s = samples_for(t, {t.start.base, Pose2(0.8, 0, 0), Pose2(-0.8, 0, 0)}, sample_grasps(4, {}));
    auto acts = ground_actions(t.start, s, t);
    auto picks = std::ranges::count_if(acts, [](const GroundAction &a) { return std::holds_alternative<PickAction>(a); });
    CHECK(picks == 24);
    for (const GroundAction &a : acts)
        if (const auto *m = std::get_if<MoveBaseAction>(&a)) {
            const auto &nb = s.roadmap[static_cast<std::size_t>(m->from)];
            CHECK(std::ranges::find(nb, m->to) != nb.end());
        }
}

TEST_CASE("ground actions while holding have no picks") {
    Task t = one_table();
    ObjectId o = add(t, "red", {0.1, 0.1});
    SampleSet s = samples_for(t, {t.start.base, Pose2(0.8, 0, 0)}, sample_grasps(4, {}));
    WorldState held = apply(t, t.start, PickMotion{o, s.grasps[0], t.start.base});
    auto acts = ground_actions(held, s, t);
    CHECK(std::ranges::none_of(acts, [](const GroundAction &a) { return std::holds_alternative<PickAction>(a); }));
    CHECK(std::ranges::any_of(acts, [](const GroundAction &a) { return std::holds_alternative<PlaceAction>(a); }));
}

TEST_CASE("escalation schedule") {
    SamplingDensity d{8, 10, 4, 1, 0};
    SamplingDensity n = escalate(d);
    CHECK(n.n_bases == 10);
    CHECK(n.n_placements_per_table == 15);
    CHECK(n.n_grasps == 6);
    CHECK(n.attempt == 1);
    SamplingDensity capped = d;
    capped.attempt = 8;
    CHECK_THROWS_AS(escalate(capped), DensityCapReached);
    CHECK_NOTHROW(escalate(capped, 8, true));
    SamplingDensity cur = d;
    for (int i = 0; i < 8; ++i) {
        SamplingDensity nx = escalate(cur);
        CHECK(nx.n_bases >= cur.n_bases);
        CHECK(nx.n_placements_per_table >= cur.n_placements_per_table);
        CHECK(nx.n_grasps >= cur.n_grasps);
        cur = nx;
    }
}

TEST_CASE("make_samples includes the current poses") {
    BenchSpec spec;
    spec.n_tables = 2;
    spec.seed = 4;
    Task t = generate(spec);
    SampleSet s = make_samples(t, t.start, SamplingDensity{}, 99);
    CHECK(s.base_index(t.start.base).has_value());
    for (const auto &[id, p] : t.start.object_poses)
        CHECK(s.placement_ref(p).has_value());
    SampleSet again = make_samples(t, t.start, SamplingDensity{}, 99);
    CHECK(again.bases == s.bases);
    CHECK(again.placements == s.placements);
}

TEST_CASE("word anchor is the prefix anchor, else a fixed layout") {
    Task t = one_table();
    t.family = Family::Words;
    t.word = "TAMP";
    t.tables[0].rect.half = {0.4, 0.2};
    ObjectId T = add(t, "T", {-0.2, 0}, RelativeWord{0});
    add(t, "A", {0.2, 0.12}, RelativeWord{1});
    add(t, "M", {0.2, -0.12}, RelativeWord{2});
    add(t, "P", {0.0, 0.12}, RelativeWord{3});

    SampleSet with_prefix = make_samples(t, t.start, SamplingDensity{}, 1);
    REQUIRE(with_prefix.word_anchor);
    CHECK(with_prefix.word_anchor->position() == Vec2{-0.2, 0});

    WorldState lifted = t.start;
    lifted.object_poses.erase(T);
    lifted.held = Held{T, 0.0};
    SampleSet a = make_samples(t, lifted, SamplingDensity{}, 1);
    SampleSet b = make_samples(t, lifted, SamplingDensity{}, 99);
    REQUIRE(a.word_anchor);
    REQUIRE(b.word_anchor);
    CHECK(a.word_anchor->position() == b.word_anchor->position());
    CHECK(word_fits(t, t.tables[0], a.word_anchor->position()));
    for (int slot = 0; slot < 4; ++slot) {
        Vec2 p = word_slot_position(t, a.word_anchor->position(), slot);
        CHECK(a.placement_ref(Pose2(p.x, p.y, 0.0)).has_value());
    }
}

}
