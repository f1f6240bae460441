#include "sketchplan/bench.hpp"

#include "sketchplan/rng.hpp"
#include "sketchplan/sampler.hpp"
#include "sketchplan/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sketchplan {

std::string to_string(Clutter c) {
    switch (c) {
    case Clutter::Low: return "low";
    case Clutter::Medium: return "medium";
    case Clutter::High: return "high";
    }
    return "?";
}

Clutter clutter_from_string(const std::string &s) {
    if (s == "low")
        return Clutter::Low;
    if (s == "medium")
        return Clutter::Medium;
    if (s == "high")
        return Clutter::High;
    throw std::invalid_argument("unknown clutter level '" + s + "'");
}

double clutter_spacing(Clutter c) {
    switch (c) {
    case Clutter::Low: return 4.0 * kObjectRadius;
    case Clutter::Medium: return 3.0 * kObjectRadius;
    case Clutter::High: return 2.2 * kObjectRadius;
    }
    return 4.0 * kObjectRadius;
}

namespace {

constexpr int kMaxAttempts = 100;
constexpr int kPoseTries = 2000;

Task base_task(Family family) {
    Task t;
    t.family = family;
    t.arena = Rect{{0.0, 0.0}, {3.0, 3.0}};
    return t;
}

void add_table(Task &t, double cx, double cy, double hx = 0.5, double hy = 0.4) {
    Table table;
    table.id = static_cast<int>(t.tables.size());
    table.rect = Rect{{cx, cy}, {hx, hy}};
    t.tables.push_back(table);
}

Pose2 base_below(const Table &table) {
    return Pose2(table.rect.center.x, table.rect.min_y() - 0.35, std::numbers::pi / 2);
}

ObjectId add_object(Task &t, const std::string &label, GoalSpec goal) {
    MovableObject o;
    o.id = static_cast<ObjectId>(t.objects.size());
    o.radius = kObjectRadius;
    o.label = label;
    o.goal = std::move(goal);
    t.objects.push_back(o);
    return o.id;
}

bool spaced(const WorldState &s, Vec2 p, double spacing) {
    return std::all_of(s.object_poses.begin(), s.object_poses.end(),
                       [&](const auto &kv) { return distance(kv.second.position(), p) >= spacing; });
}

Vec2 uniform_on(const Table &table, double inset, Rng &rng) {
    return {rng.uniform(table.rect.min_x() + inset, table.rect.max_x() - inset),
            rng.uniform(table.rect.min_y() + inset, table.rect.max_y() - inset)};
}

int family_goals(const BenchSpec &spec, int fallback) {
    return spec.n_goal_objects >= 0 ? spec.n_goal_objects : fallback;
}

}  // namespace

Task gen_sorting(const BenchSpec &spec) {
    if (spec.n_tables < 1 || spec.n_tables > 4)
        throw std::invalid_argument("sorting supports 1 to 4 tables");
    const int goals = family_goals(spec, 2);
    const int n_blue = (goals + 1) / 2, n_green = goals / 2;
    const int n_red = spec.n_obstacle_objects >= 0 ? spec.n_obstacle_objects : 2 * n_blue;
    if (goals < 0 || n_red < 0)
        throw std::invalid_argument("object counts must be non-negative");
    const double spacing = clutter_spacing(spec.clutter);
    const double r = kObjectRadius;

    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        Rng rng(hash_combine(spec.seed, static_cast<std::uint64_t>(attempt)));
        Task t = base_task(Family::Sorting);
        switch (spec.n_tables) {
        case 1: add_table(t, 0.0, 0.0); break;
        case 2: add_table(t, -1.1, 0.0); add_table(t, 1.1, 0.0); break;
        case 3: add_table(t, -1.1, 0.0); add_table(t, 1.1, 0.0); add_table(t, 0.0, 1.3); break;
        default:
            add_table(t, -1.1, -0.9); add_table(t, 1.1, -0.9); add_table(t, -1.1, 0.9); add_table(t, 1.1, 0.9);
            break;
        }
        AbsoluteRegion left, right;
        if (spec.n_tables == 1) {
            const Rect &tr = t.tables[0].rect;
            left = {0, Rect{{tr.center.x - tr.half.x / 2, tr.center.y}, {tr.half.x / 2, tr.half.y}}};
            right = {0, Rect{{tr.center.x + tr.half.x / 2, tr.center.y}, {tr.half.x / 2, tr.half.y}}};
        } else {
            auto by_x = [&](bool max) {
                int best = 0;
                for (const Table &tb : t.tables) {
                    const Table &b = t.tables[static_cast<std::size_t>(best)];
                    bool better = max ? tb.rect.center.x > b.rect.center.x : tb.rect.center.x < b.rect.center.x;
                    if (better)
                        best = tb.id;
                }
                return best;
            };
            int l = by_x(false), rt = by_x(true);
            left = {l, t.tables[static_cast<std::size_t>(l)].rect};
            right = {rt, t.tables[static_cast<std::size_t>(rt)].rect};
        }
        for (int i = 0; i < n_blue; ++i)
            add_object(t, "blue", left);
        for (int i = 0; i < n_green; ++i)
            add_object(t, "green", right);
        for (int i = 0; i < n_red; ++i)
            add_object(t, "red", GoalNone{});

        t.start.base = base_below(t.tables[0]);
        bool ok = true;
        std::vector<ObjectId> goal_ids;
        for (const MovableObject &o : t.objects) {
            if (!ok)
                break;
            bool placed = false;
            for (int tries = 0; tries < kPoseTries && !placed; ++tries) {
                Vec2 p;
                if (has_goal(o.goal) || spec.clutter == Clutter::Low || goal_ids.empty()) {
                    const Table &tb = t.tables[rng.below(t.tables.size())];
                    p = uniform_on(tb, r, rng);
                } else {
                    // obstacles crowd the goal objects
                    ObjectId anchor = goal_ids[rng.below(goal_ids.size())];
                    Vec2 a = t.start.object_poses.at(anchor).position();
                    double ang = rng.uniform(-std::numbers::pi, std::numbers::pi);
                    double d = rng.uniform(spacing, spacing + 2.0 * r);
                    p = {a.x + d * std::cos(ang), a.y + d * std::sin(ang)};
                    auto tb = t.table_at(a);
                    if (!tb || !t.table(*tb).rect.contains(p, r))
                        continue;
                }
                if (!spaced(t.start, p, spacing))
                    continue;
                if (has_goal(o.goal) && pose_satisfies_goal(t, o, Pose2(p.x, p.y)))
                    continue;
                t.start.object_poses[o.id] = Pose2(p.x, p.y, 0.0);
                placed = true;
            }
            if (has_goal(o.goal))
                goal_ids.push_back(o.id);
            ok = placed;
        }
        if (!ok || check_state(t, t.start) || is_goal(t.start, t))
            continue;
        return t;
    }
    throw GenerationFailed("could not generate a sorting task at this clutter level");
}

Task gen_nonmonotonic(const BenchSpec &spec) {
    const int n_green = family_goals(spec, 3);
    const int k = spec.n_obstacle_objects >= 0 ? spec.n_obstacle_objects : 7;
    const int n_red = (k + 1) / 2, n_blue = k - n_red;
    const double r = kObjectRadius;
    const double step = 2.2 * r;
    if (n_green < 1)
        throw std::invalid_argument("non-monotonic tasks need at least one green block");

    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        Rng rng(hash_combine(spec.seed, static_cast<std::uint64_t>(attempt)));
        Task t = base_task(Family::NonMonotonic);
        add_table(t, -1.1, 0.0);
        add_table(t, 1.1, 0.0);
        t.start.base = base_below(t.tables[0]);

        // rows alternate obstacle / green (or goal slot), starting with an obstacle
        auto row = [&](int obstacles, int greens) {
            std::vector<bool> is_green;
            int o = obstacles, g = greens;
            bool next_obstacle = true;
            while (o > 0 || g > 0) {
                bool take_obstacle = (next_obstacle && o > 0) || g == 0;
                is_green.push_back(!take_obstacle);
                (take_obstacle ? o : g)--;
                next_obstacle = !take_obstacle;
            }
            return is_green;
        };
        auto positions = [&](const Table &tb, std::size_t n) {
            Vec2 c{tb.rect.center.x + rng.uniform(-0.08, 0.08), tb.rect.center.y + rng.uniform(-0.08, 0.08)};
            std::vector<Vec2> out;
            for (std::size_t j = 0; j < n; ++j)
                out.push_back({c.x + (static_cast<double>(j) - (static_cast<double>(n) - 1) / 2) * step, c.y});
            return out;
        };

        auto src = row(n_red, n_green);
        auto src_pos = positions(t.tables[0], src.size());
        auto dst = row(n_blue, n_green);
        auto dst_pos = positions(t.tables[1], dst.size());

        std::vector<Vec2> goal_slots;
        for (std::size_t j = 0; j < dst.size(); ++j)
            if (dst[j])
                goal_slots.push_back(dst_pos[j]);
        std::size_t next_goal = 0;
        for (std::size_t j = 0; j < src.size(); ++j) {
            Pose2 p(src_pos[j].x, src_pos[j].y, 0.0);
            ObjectId id;
            if (src[j]) {
                Vec2 g = goal_slots[next_goal++];
                id = add_object(t, "green", AbsoluteRegion{1, Rect{g, {0.2 * r, 0.5 * r}}});
            } else {
                id = add_object(t, "red", ExactPose{p, 0.5 * r});
            }
            t.start.object_poses[id] = p;
        }
        for (std::size_t j = 0; j < dst.size(); ++j) {
            if (dst[j])
                continue;
            Pose2 p(dst_pos[j].x, dst_pos[j].y, 0.0);
            ObjectId id = add_object(t, "blue", ExactPose{p, 0.5 * r});
            t.start.object_poses[id] = p;
        }
        if (check_state(t, t.start) || is_goal(t.start, t))
            continue;

        SampleSet samples = make_samples(t, t.start, SamplingDensity{}, hash_combine(spec.seed, 0x6e6d));
        FeatureEvaluator eval(t, samples);
        bool boxed_in = true;
        for (const MovableObject &o : t.objects)
            if (o.label == "green" && eval.blocking_counts(t.start, o.id).alpha == 0)
                boxed_in = false;
        if (boxed_in)
            return t;
    }
    throw GenerationFailed("could not generate a non-monotonic task with obstructed greens");
}

Task gen_words(const BenchSpec &spec) {
    const std::string &word = spec.word;
    if (word.empty() || static_cast<int>(word.size()) > kWordBlocks)
        throw std::invalid_argument("word must have 1 to 11 letters");
    for (char c : word)
        if (c < 'A' || c > 'Z')
            throw std::invalid_argument("word letters must be uppercase A-Z");
    const double r = kObjectRadius;
    const double spacing = std::min(clutter_spacing(spec.clutter), 2.4 * r);

    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        Rng rng(hash_combine(spec.seed, static_cast<std::uint64_t>(attempt)));
        Task t = base_task(Family::Words);
        t.word = word;
        double pitch = t.word_layout.pitch_factor * r;
        double width = std::max(1.0, 1.25 * ((static_cast<double>(word.size()) - 1) * pitch + 4.0 * r));
        add_table(t, 0.0, 0.0, width / 2, 0.4);
        t.start.base = base_below(t.tables[0]);

        std::string letters = word;
        std::string others;
        for (char c = 'A'; c <= 'Z'; ++c)
            if (word.find(c) == std::string::npos)
                others.push_back(c);
        while (static_cast<int>(letters.size()) < kWordBlocks)
            letters.push_back(others[rng.below(others.size())]);
        for (char c : letters) {
            auto slot = word.find(c);
            GoalSpec goal = GoalNone{};
            if (slot != std::string::npos)
                goal = RelativeWord{static_cast<int>(slot)};
            add_object(t, std::string(1, c), goal);
        }

        bool ok = true;
        for (const MovableObject &o : t.objects) {
            bool placed = false;
            for (int tries = 0; tries < kPoseTries && !placed; ++tries) {
                Vec2 p = uniform_on(t.tables[0], r, rng);
                if (!spaced(t.start, p, spacing))
                    continue;
                t.start.object_poses[o.id] = Pose2(p.x, p.y, 0.0);
                placed = true;
            }
            if (!(ok = placed))
                break;
        }
        if (!ok || check_state(t, t.start) || is_goal(t.start, t))
            continue;
        return t;
    }
    throw GenerationFailed("could not scatter the letter blocks on the table");
}

Task generate(const BenchSpec &spec) {
    switch (spec.family) {
    case Family::Sorting: return gen_sorting(spec);
    case Family::NonMonotonic: return gen_nonmonotonic(spec);
    case Family::Words: return gen_words(spec);
    }
    throw std::invalid_argument("unknown family");
}

}  // namespace sketchplan
