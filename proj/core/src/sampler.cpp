#include "sketchplan/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>

namespace sketchplan {

SamplingDensity escalate(const SamplingDensity &density, int max_escalations, bool uncapped) {
    if (!uncapped && density.attempt >= max_escalations)
        throw DensityCapReached("sampling density cap reached after " + std::to_string(density.attempt) +
                                " escalations");
    SamplingDensity next = density;
    next.attempt = density.attempt + 1;
    next.n_placements_per_table =
        std::min(kMaxPlacementsPerTable, static_cast<int>(std::ceil(1.5 * density.n_placements_per_table)));
    next.n_bases = std::min(kMaxBases, static_cast<int>(std::ceil(1.25 * density.n_bases)));
    next.n_grasps = std::min(density.n_grasps + 2, kMaxGrasps);
    next.n_sops = density.n_sops;
    return next;
}

int SampleSet::placement_count() const {
    int n = 0;
    for (const auto &p : placements)
        n += static_cast<int>(p.size());
    return n;
}

int SampleSet::flat_index(PlacementRef ref) const {
    int n = 0;
    for (int t = 0; t < ref.table; ++t)
        n += static_cast<int>(placements[static_cast<std::size_t>(t)].size());
    return n + ref.index;
}

std::optional<int> SampleSet::base_index(const Pose2 &p) const {
    for (std::size_t i = 0; i < bases.size(); ++i)
        if (bases[i].x == p.x && bases[i].y == p.y)
            return static_cast<int>(i);
    return std::nullopt;
}

std::optional<PlacementRef> SampleSet::placement_ref(const Pose2 &p) const {
    for (std::size_t t = 0; t < placements.size(); ++t)
        for (std::size_t i = 0; i < placements[t].size(); ++i)
            if (placements[t][i].x == p.x && placements[t][i].y == p.y)
                return PlacementRef{static_cast<int>(t), static_cast<int>(i)};
    return std::nullopt;
}

std::optional<int> SampleSet::grasp_index(double g) const {
    for (std::size_t i = 0; i < grasps.size(); ++i)
        if (grasps[i] == g)
            return static_cast<int>(i);
    return std::nullopt;
}

int SampleSet::nearest_base(Vec2 p) const {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < bases.size(); ++i) {
        double d = distance(bases[i].position(), p);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

ConcreteAction resolve(const SampleSet &samples, const GroundAction &action) {
    if (const auto *a = std::get_if<PickAction>(&action))
        return PickMotion{a->object, samples.grasps.at(static_cast<std::size_t>(a->grasp)),
                          samples.bases.at(static_cast<std::size_t>(a->base))};
    if (const auto *a = std::get_if<PlaceAction>(&action))
        return PlaceMotion{a->object, samples.placement(a->placement), a->placement.table, a->sop,
                           samples.bases.at(static_cast<std::size_t>(a->base))};
    const auto &m = std::get<MoveBaseAction>(action);
    return MoveBaseMotion{samples.bases.at(static_cast<std::size_t>(m.from)),
                          samples.bases.at(static_cast<std::size_t>(m.to))};
}

namespace {

std::optional<Rect> intersect(const Rect &a, const Rect &b) {
    double lo_x = std::max(a.min_x(), b.min_x()), hi_x = std::min(a.max_x(), b.max_x());
    double lo_y = std::max(a.min_y(), b.min_y()), hi_y = std::min(a.max_y(), b.max_y());
    if (lo_x > hi_x || lo_y > hi_y)
        return std::nullopt;
    return Rect{{(lo_x + hi_x) / 2, (lo_y + hi_y) / 2}, {(hi_x - lo_x) / 2, (hi_y - lo_y) / 2}};
}

Rect shrink(const Rect &r, double m) { return {r.center, {r.half.x - m, r.half.y - m}}; }

Vec2 nearest_point(const Rect &r, Vec2 p) {
    return {std::clamp(p.x, r.min_x(), r.max_x()), std::clamp(p.y, r.min_y(), r.max_y())};
}

}  // namespace

std::vector<Pose2> sample_placements(const Table &table, int k, std::vector<Pose2> fixed,
                                     std::span<const Disc> obstacles, double radius, Rng &rng,
                                     const Rect *domain, SamplingTrace *trace) {
    std::vector<Pose2> result = std::move(fixed);
    if (k <= 0)
        return result;
    Rect inner = shrink(table.rect, radius);
    std::optional<Rect> area = inner.half.x >= 0 && inner.half.y >= 0 ? std::optional<Rect>(inner) : std::nullopt;
    if (area && domain)
        area = intersect(*area, *domain);
    if (!area)
        throw SamplingExhausted("no room for placements on table " + std::to_string(table.id));

    auto is_free = [&](Vec2 c) {
        return std::all_of(obstacles.begin(), obstacles.end(), [&](const Disc &d) {
            return distance(c, d.center) >= radius + d.radius - kOverlapEpsilon;
        });
    };
    auto score = [&](Vec2 c) {
        double s = std::numeric_limits<double>::infinity();
        for (const Pose2 &p : result)
            s = std::min(s, distance(c, p.position()));
        for (const Disc &d : obstacles)
            s = std::min(s, distance(c, d.center));
        return s;
    };

    const long budget = static_cast<long>(kMaximinBatch) * k * kMaximinRetryFactor;
    long draws = 0;
    for (int i = 0; i < k; ++i) {
        SamplingTrace::Batch batch;
        while (static_cast<int>(batch.candidates.size()) < kMaximinBatch && draws < budget) {
            ++draws;
            Vec2 c{rng.uniform(area->min_x(), area->max_x()), rng.uniform(area->min_y(), area->max_y())};
            if (is_free(c))
                batch.candidates.emplace_back(c.x, c.y, 0.0);
        }
        if (batch.candidates.empty())
            throw SamplingExhausted("placement sampling exhausted on table " + std::to_string(table.id) + " after " +
                                    std::to_string(draws) + " draws");
        for (const Pose2 &c : batch.candidates)
            batch.scores.push_back(score(c.position()));
        batch.chosen = static_cast<std::size_t>(
            std::max_element(batch.scores.begin(), batch.scores.end()) - batch.scores.begin());
        result.push_back(batch.candidates[batch.chosen]);
        if (trace)
            trace->batches.push_back(std::move(batch));
    }
    return result;
}

std::vector<Pose2> sample_bases(const Task &task, int k, std::span<const Pose2> anchors, Rng &rng,
                               std::span<const Vec2> targets) {
    const RobotParams &robot = task.robot;
    std::vector<Pose2> result;
    for (const Pose2 &a : anchors) {
        bool dup = std::any_of(result.begin(), result.end(), [&](const Pose2 &p) { return p.x == a.x && p.y == a.y; });
        if (!dup)
            result.push_back(a);
    }

    auto table_distance = [&](Vec2 p) {
        double d = std::numeric_limits<double>::infinity();
        for (const Table &t : task.tables)
            d = std::min(d, t.rect.distance_to(p));
        return d;
    };
    auto facing = [&](Vec2 p) {
        double best = std::numeric_limits<double>::infinity();
        Vec2 target = p;
        for (const Table &t : task.tables) {
            Vec2 q = nearest_point(t.rect, p);
            if (distance(p, q) < best) {
                best = distance(p, q);
                target = q;
            }
        }
        return best > 0 ? bearing(p, target) : 0.0;
    };
    auto draw = [&]() -> Pose2 {
        const Rect &arena = task.arena;
        for (int tries = 0; tries < 100000; ++tries) {
            Vec2 p{rng.uniform(arena.min_x() + robot.base_radius, arena.max_x() - robot.base_radius),
                   rng.uniform(arena.min_y() + robot.base_radius, arena.max_y() - robot.base_radius)};
            double d = table_distance(p);
            if (d >= robot.base_radius && d <= robot.reach_max)
                return Pose2(p.x, p.y, facing(p));
        }
        throw SamplingExhausted("no valid base location found in the arena");
    };

    struct Segment {
        Vec2 a, b;
    };
    std::vector<Segment> segments;
    for (const Table &t : task.tables) {
        Vec2 c[4] = {{t.rect.min_x(), t.rect.min_y()},
                     {t.rect.max_x(), t.rect.min_y()},
                     {t.rect.max_x(), t.rect.max_y()},
                     {t.rect.min_x(), t.rect.max_y()}};
        for (int e = 0; e < 4; ++e) {
            Vec2 a = c[e], b = c[(e + 1) % 4];
            int pieces = std::max(1, static_cast<int>(std::ceil(distance(a, b) / robot.reach_max)));
            for (int i = 0; i < pieces; ++i)
                segments.push_back({a + (double(i) / pieces) * (b - a), a + (double(i + 1) / pieces) * (b - a)});
        }
    }
    std::vector<bool> covered(segments.size(), false);
    auto mark = [&](const Pose2 &p) {
        for (std::size_t s = 0; s < segments.size(); ++s)
            if (distance_point_segment(p.position(), segments[s].a, segments[s].b) <= robot.reach_max)
                covered[s] = true;
    };
    for (const Pose2 &p : result)
        mark(p);

    while (static_cast<int>(result.size()) < k &&
           std::find(covered.begin(), covered.end(), false) != covered.end()) {
        std::optional<Pose2> best;
        int best_gain = 0;
        for (int c = 0; c < 64; ++c) {
            Pose2 cand = draw();
            int gain = 0;
            for (std::size_t s = 0; s < segments.size(); ++s)
                if (!covered[s] && distance_point_segment(cand.position(), segments[s].a, segments[s].b) <= robot.reach_max)
                    ++gain;
            if (gain > best_gain) {
                best_gain = gain;
                best = cand;
            }
        }
        if (!best)
            break;
        result.push_back(*best);
        mark(*best);
    }

    // then reach: object positions weigh more than the table grid
    struct Target {
        Vec2 p;
        int weight;
        bool covered = false;
    };
    std::vector<Target> want;
    for (Vec2 p : targets)
        want.push_back({p, 4});
    for (const Table &t : task.tables) {
        int nx = std::max(1, static_cast<int>(std::ceil(2 * t.rect.half.x / kGridStep)));
        int ny = std::max(1, static_cast<int>(std::ceil(2 * t.rect.half.y / kGridStep)));
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j)
                want.push_back({{t.rect.min_x() + (i + 0.5) * 2 * t.rect.half.x / nx,
                                 t.rect.min_y() + (j + 0.5) * 2 * t.rect.half.y / ny},
                                1});
    }
    auto reaches = [&](Vec2 b, Vec2 p) {
        double d = distance(b, p);
        return d >= robot.reach_min && d <= robot.reach_max;
    };
    auto cover = [&](const Pose2 &b) {
        for (Target &t : want)
            t.covered = t.covered || reaches(b.position(), t.p);
    };
    for (const Pose2 &p : result)
        cover(p);
    while (static_cast<int>(result.size()) < k) {
        auto open = std::find_if(want.begin(), want.end(), [](const Target &t) { return !t.covered; });
        if (open == want.end())
            break;
        std::optional<Pose2> best;
        int best_gain = 0;
        for (int c = 0; c < 64; ++c) {
            double ang = rng.uniform(-std::numbers::pi, std::numbers::pi);
            double d = rng.uniform(robot.reach_min + 0.05, robot.reach_max - 0.05);
            Vec2 p{open->p.x + d * std::cos(ang), open->p.y + d * std::sin(ang)};
            double td = table_distance(p);
            if (td < robot.base_radius || td > robot.reach_max || !task.arena.contains(p, robot.base_radius))
                continue;
            int gain = 0;
            for (const Target &t : want)
                if (!t.covered && reaches(p, t.p))
                    gain += t.weight;
            if (gain > best_gain) {
                best_gain = gain;
                best = Pose2(p.x, p.y, facing(p));
            }
        }
        if (best) {
            result.push_back(*best);
            cover(*best);
        } else {
            open->covered = true;  // unreachable from any valid base
        }
    }
    while (static_cast<int>(result.size()) < k)
        result.push_back(draw());
    return result;
}

std::pair<std::vector<std::vector<int>>, double> build_roadmap(std::span<const Pose2> bases) {
    const std::size_t n = bases.size();
    std::vector<std::vector<int>> adj(n);
    if (n <= 1)
        return {adj, 0.0};
    double sum_nn = 0.0, max_pair = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double nn = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j)
                continue;
            double d = distance(bases[i].position(), bases[j].position());
            nn = std::min(nn, d);
            max_pair = std::max(max_pair, d);
        }
        sum_nn += nn;
    }
    double d_max = 2.0 * sum_nn / static_cast<double>(n);
    if (d_max <= 0.0)
        d_max = max_pair > 0.0 ? max_pair : 1.0;
    for (;;) {
        for (auto &a : adj)
            a.clear();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (distance(bases[i].position(), bases[j].position()) <= d_max) {
                    adj[i].push_back(static_cast<int>(j));
                    adj[j].push_back(static_cast<int>(i));
                }
        std::vector<bool> seen(n, false);
        std::vector<std::size_t> stack{0};
        seen[0] = true;
        std::size_t count = 1;
        while (!stack.empty()) {
            std::size_t v = stack.back();
            stack.pop_back();
            for (int w : adj[v])
                if (!seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = true;
                    ++count;
                    stack.push_back(static_cast<std::size_t>(w));
                }
        }
        if (count == n)
            break;
        d_max *= 2.0;
    }
    for (auto &a : adj)
        std::sort(a.begin(), a.end());
    return {adj, d_max};
}

std::vector<GroundAction> ground_actions(const WorldState &state, const SampleSet &samples, const Task &task) {
    std::vector<GroundAction> out;
    if (!samples.bases.empty()) {
        int cur = samples.base_index(state.base).value_or(samples.nearest_base(state.base.position()));
        for (int to : samples.roadmap.at(static_cast<std::size_t>(cur)))
            out.push_back(MoveBaseAction{cur, to});
    }
    const int n_bases = static_cast<int>(samples.bases.size());
    if (state.held) {
        const int n_sops = 1;
        for (std::size_t t = 0; t < samples.placements.size(); ++t)
            for (std::size_t i = 0; i < samples.placements[t].size(); ++i)
                for (int b = 0; b < n_bases; ++b)
                    for (int s = 0; s < n_sops; ++s)
                        out.push_back(PlaceAction{b, state.held->object,
                                                  PlacementRef{static_cast<int>(t), static_cast<int>(i)}, s});
    } else {
        const int n_grasps = static_cast<int>(samples.grasps.size());
        for (const auto &[id, pose] : state.object_poses)
            for (int b = 0; b < n_bases; ++b)
                for (int g = 0; g < n_grasps; ++g)
                    out.push_back(PickAction{b, id, g});
    }
    (void)task;
    return out;
}

std::vector<double> sample_grasps(int n, std::optional<double> keep) {
    std::vector<double> g;
    for (int i = 0; i < n; ++i)
        g.push_back(normalize_angle(-std::numbers::pi + 2.0 * std::numbers::pi * i / n));
    if (keep && std::find(g.begin(), g.end(), *keep) == g.end())
        g.push_back(*keep);
    return g;
}

std::vector<std::pair<int, Pose2>> required_goal_poses(const WorldState &state, const Task &task) {
    std::vector<std::pair<int, Pose2>> out;
    for (const MovableObject &o : task.objects) {
        if (const auto *e = std::get_if<ExactPose>(&o.goal)) {
            if (auto t = task.table_at(e->pose.position()))
                out.emplace_back(*t, e->pose);
        } else if (const auto *r = std::get_if<AbsoluteRegion>(&o.goal)) {
            out.emplace_back(r->table_id, Pose2(r->region.center.x, r->region.center.y, 0.0));
        }
    }
    if (task.family == Family::Words) {
        WordPrefix prefix = words_valid_prefix_detail(state, task);
        if (!prefix.blocks.empty()) {
            int table = task.table_at(prefix.anchor).value_or(0);
            for (int slot = static_cast<int>(prefix.blocks.size()); slot < static_cast<int>(task.word.size()); ++slot) {
                Vec2 p = word_slot_position(task, prefix.anchor, slot);
                out.emplace_back(table, Pose2(p.x, p.y, 0.0));
            }
        }
    }
    return out;
}

namespace {

constexpr std::uint64_t kWordAnchorSeed = 0x3a7c0f;

void push_unique(std::vector<Pose2> &v, const Pose2 &p) {
    if (std::none_of(v.begin(), v.end(), [&](const Pose2 &q) { return q.x == p.x && q.y == p.y; }))
        v.push_back(p);
}

// Samples up to `k` poses, backing off when the area is too cluttered.
std::vector<Pose2> sample_some(const Table &table, int k, std::vector<Pose2> fixed, std::span<const Disc> obstacles,
                               double radius, Rng &rng, const Rect *domain) {
    for (int want = k; want > 0; want /= 2) {
        try {
            return sample_placements(table, want, fixed, obstacles, radius, rng, domain);
        } catch (const SamplingExhausted &) {
        }
    }
    return fixed;
}

}  // namespace

SampleSet make_samples(const Task &task, const WorldState &state, const SamplingDensity &density, std::uint64_t seed,
                       const std::vector<Pose2> *reuse_bases) {
    SampleSet s;
    s.seed = seed;
    Rng rng(seed);
    s.grasps = sample_grasps(density.n_grasps,
                             state.held ? std::optional<double>(state.held->grasp) : std::nullopt);

    std::vector<Pose2> anchors{state.base, task.start.base};
    if (reuse_bases) {
        s.bases = *reuse_bases;
        if (!s.base_index(state.base))
            s.bases.push_back(state.base);
    } else {
        std::vector<Vec2> targets;
        for (const auto &[id, p] : state.object_poses)
            targets.push_back(p.position());
        for (const auto &[t, p] : required_goal_poses(state, task))
            targets.push_back(p.position());
        s.bases = sample_bases(task, density.n_bases, anchors, rng, targets);
    }
    std::tie(s.roadmap, s.d_max) = build_roadmap(s.bases);

    double radius = 0.0;
    for (const MovableObject &o : task.objects)
        radius = std::max(radius, o.radius);
    std::vector<Disc> obstacles;
    for (const auto &[id, p] : state.object_poses)
        obstacles.push_back({p.position(), task.object(id).radius});

    auto goals = required_goal_poses(state, task);
    int best_occupied = 0;
    const WordPrefix prefix =
        task.family == Family::Words ? words_valid_prefix_detail(state, task) : WordPrefix{};
    const int rounds = density.attempt + 1;
    s.placements.resize(task.tables.size());
    for (const Table &table : task.tables) {
        std::vector<Pose2> fixed;
        for (const auto &[id, p] : state.object_poses)
            if (task.table_at(p.position()) == table.id)
                push_unique(fixed, p);
        for (const auto &[t, p] : goals)
            if (t == table.id)
                push_unique(fixed, p);

        std::set<std::pair<double, double>> seen_regions;
        for (const MovableObject &o : task.objects) {
            const auto *r = std::get_if<AbsoluteRegion>(&o.goal);
            if (!r || r->table_id != table.id || !seen_regions.insert({r->region.center.x, r->region.center.y}).second)
                continue;
            fixed = sample_some(table, kRegionSamplesPerRound * rounds, fixed, obstacles, radius, rng, &r->region);
        }

        if (task.family == Family::Words && !prefix.blocks.empty()) {
            if (task.table_at(prefix.anchor) == table.id)
                s.word_anchor = Pose2(prefix.anchor.x, prefix.anchor.y, 0.0);
        } else if (task.family == Family::Words && !task.word.empty()) {
            double r = word_radius(task);
            double inset = r + task.word_layout.margin_factor * r;
            double span = (static_cast<double>(task.word.size()) - 1) * word_pitch(task);
            Rect anchors_domain{{table.rect.center.x - span / 2, table.rect.center.y},
                                {table.rect.half.x - inset - span / 2, table.rect.half.y - inset}};
            if (anchors_domain.half.x >= 0 && anchors_domain.half.y >= 0) {
                // same candidates in every subproblem, so the chosen layout stays put while it is cleared
                Rng anchor_rng(hash_combine(kWordAnchorSeed, static_cast<std::uint64_t>(table.id)));
                for (int c = 0; c < kRegionSamplesPerRound * rounds; ++c) {
                    Pose2 a(anchor_rng.uniform(anchors_domain.min_x(), anchors_domain.max_x()),
                            anchor_rng.uniform(anchors_domain.min_y(), anchors_domain.max_y()), 0.0);
                    int occupied = 0;
                    for (int slot = 0; slot < static_cast<int>(task.word.size()); ++slot) {
                        Vec2 p = word_slot_position(task, a.position(), slot);
                        push_unique(fixed, Pose2(p.x, p.y, 0.0));
                        for (const Disc &d : obstacles)
                            if (distance(d.center, p) < d.radius + r)
                                ++occupied;
                    }
                    if (!word_fits(task, table, a.position()))
                        continue;
                    if (!s.word_anchor || occupied < best_occupied) {
                        s.word_anchor = a;
                        best_occupied = occupied;
                    }
                }
            }
        }

        s.placements[static_cast<std::size_t>(table.id)] =
            sample_some(table, density.n_placements_per_table, fixed, obstacles, radius, rng, nullptr);
    }
    return s;
}

}  // namespace sketchplan
