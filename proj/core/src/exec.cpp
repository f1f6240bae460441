#include "sketchplan/exec.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace sketchplan {

void PipelineStats::merge(const PipelineStats &other) {
    auto add = [](StageCounter &a, const StageCounter &b) {
        a.calls += b.calls;
        a.passes += b.passes;
        a.seconds += b.seconds;
    };
    for (std::size_t i = 0; i < stages.size(); ++i)
        add(stages[i], other.stages[i]);
    add(navigation, other.navigation);
    corridor_tests += other.corridor_tests;
    rrt_iterations += other.rrt_iterations;
}

bool PipelineStats::consistent() const {
    for (std::size_t i = 0; i < stages.size(); ++i) {
        if (stages[i].passes > stages[i].calls)
            return false;
        if (i > 0 && stages[i].calls > stages[i - 1].passes)
            return false;
    }
    return navigation.passes <= navigation.calls;
}

std::string stats_csv(const PipelineStats &stats) {
    std::ostringstream out;
    out << "stage,calls,passes,pass_ratio,cumulative_pass_ratio\n";
    auto ratio = [](std::uint64_t a, std::uint64_t b) { return b == 0 ? 0.0 : double(a) / double(b); };
    const char *names[] = {"in_arm_workspace", "inverse_kinematics", "motion_plan"};
    for (std::size_t i = 0; i < stats.stages.size(); ++i) {
        const StageCounter &s = stats.stages[i];
        out << names[i] << ',' << s.calls << ',' << s.passes << ',' << ratio(s.passes, s.calls) << ','
            << ratio(s.passes, stats.stages[0].calls) << '\n';
    }
    const StageCounter &n = stats.navigation;
    out << "navigation," << n.calls << ',' << n.passes << ',' << ratio(n.passes, n.calls) << ','
        << ratio(n.passes, n.calls) << '\n';
    return out.str();
}

Vec2 action_target(const WorldState &state, const ConcreteAction &action) {
    if (const auto *p = std::get_if<PickMotion>(&action)) {
        auto it = state.object_poses.find(p->object);
        return it == state.object_poses.end() ? Vec2{NAN, NAN} : it->second.position();
    }
    if (const auto *p = std::get_if<PlaceMotion>(&action))
        return p->placement.position();
    return std::get<MoveBaseMotion>(action).to.position();
}

bool disc_in_corridor(Vec2 a, Vec2 b, double half_width, Vec2 c, double r) {
    Vec2 d = b - a;
    double len = d.norm();
    if (len <= 0.0)
        return distance(a, c) < half_width + r;
    Vec2 u = (1.0 / len) * d;
    Vec2 rel = c - a;
    double along = dot(rel, u);
    double perp = std::abs(rel.x * u.y - rel.y * u.x);
    double dx = std::max({0.0, -along, along - len});
    double dy = std::max(0.0, perp - half_width);
    return std::hypot(dx, dy) < r - kOverlapEpsilon;
}

Vec2 gripper_start(const Task &task, Vec2 base, Vec2 target) {
    double len = distance(base, target);
    if (len <= 0.0)
        return base;
    return base + (std::min(task.robot.reach_min, len) / len) * (target - base);
}

bool base_hits_object(const Task &task, const WorldState &state, Vec2 base, std::optional<ObjectId> ignore) {
    for (const auto &[id, p] : state.object_poses)
        if (id != ignore && distance(base, p.position()) < task.robot.base_radius + task.object(id).radius - kOverlapEpsilon)
            return true;
    return false;
}

namespace {

// Corridor test with a budget; nullopt when the budget runs out.
std::optional<bool> corridor_clear(const Task &task, const WorldState &state, Vec2 base, Vec2 target,
                                   double radius, std::optional<ObjectId> ignore, int budget,
                                   std::uint64_t *tests) {
    Vec2 start = gripper_start(task, base, target);
    double half = radius + kCorridorClearance;
    int used = 0;
    for (const auto &[id, p] : state.object_poses) {
        if (ignore && *ignore == id)
            continue;
        if (++used > budget)
            return std::nullopt;
        if (tests)
            ++*tests;
        if (disc_in_corridor(start, target, half, p.position(), task.object(id).radius))
            return false;
    }
    return true;
}

}  // namespace

std::uint64_t corridor_mask(const Task &task, const WorldState &state, Vec2 base, Vec2 target, double radius,
                            std::optional<ObjectId> ignore) {
    Vec2 start = gripper_start(task, base, target);
    double half = radius + kCorridorClearance;
    std::uint64_t mask = 0;
    for (const auto &[id, p] : state.object_poses) {
        if (ignore && *ignore == id)
            continue;
        if (disc_in_corridor(start, target, half, p.position(), task.object(id).radius))
            mask |= std::uint64_t{1} << (id & 63);
    }
    return mask;
}

bool grasp_compatible(double grasp, Vec2 base, Vec2 target) {
    return std::abs(angle_diff(grasp, bearing(base, target))) <= kGraspTolerance;
}

bool in_arm_workspace(const Task &task, const WorldState &state, const ConcreteAction &action) {
    if (std::holds_alternative<MoveBaseMotion>(action))
        return true;
    Vec2 target = action_target(state, action);
    if (!std::isfinite(target.x))
        return false;
    double d = distance(action_base(action).position(), target);
    return d >= task.robot.reach_min && d <= task.robot.reach_max;
}

bool inverse_kinematics(const Task &task, const WorldState &state, const ConcreteAction &action, int budget,
                        std::uint64_t *tests) {
    if (std::holds_alternative<MoveBaseMotion>(action))
        return true;
    Vec2 base = action_base(action).position();
    if (base_hits_object(task, state, base))
        return false;
    if (const auto *pick = std::get_if<PickMotion>(&action)) {
        if (state.held)
            return false;
        auto it = state.object_poses.find(pick->object);
        if (it == state.object_poses.end())
            return false;
        Vec2 target = it->second.position();
        if (!grasp_compatible(pick->grasp, base, target))
            return false;
        auto clear = corridor_clear(task, state, base, target, task.object(pick->object).radius, pick->object,
                                    budget, tests);
        return clear.value_or(false);
    }
    const auto &place = std::get<PlaceMotion>(action);
    if (!state.held || state.held->object != place.object)
        return false;
    if (place.table < 0 || place.table >= static_cast<int>(task.tables.size()))
        return false;
    double radius = task.object(place.object).radius;
    if (!placement_free(task, state, task.table(place.table), place.placement, radius))
        return false;
    Vec2 target = place.placement.position();
    if (!grasp_compatible(state.held->grasp, base, target))
        return false;
    return corridor_clear(task, state, base, target, radius, std::nullopt, budget, tests).value_or(false);
}

bool base_valid(const Task &task, Vec2 p) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !task.arena.contains(p, task.robot.base_radius))
        return false;
    for (const Table &t : task.tables)
        if (disc_intersects_rect(p, task.robot.base_radius, t.rect))
            return false;
    return true;
}

namespace {

constexpr double kEdgeResolution = 0.02;

bool segment_valid(const Task &task, Vec2 a, Vec2 b) {
    int n = std::max(1, static_cast<int>(std::ceil(distance(a, b) / kEdgeResolution)));
    for (int i = 1; i <= n; ++i)
        if (!base_valid(task, a + (double(i) / n) * (b - a)))
            return false;
    return true;
}

struct Tree {
    std::vector<Vec2> nodes;
    std::vector<int> parent;

    int nearest(Vec2 q) const {
        int best = 0;
        double best_d = distance(nodes[0], q);
        for (std::size_t i = 1; i < nodes.size(); ++i) {
            double d = distance(nodes[i], q);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(i);
            }
        }
        return best;
    }

    std::vector<Vec2> branch(int i) const {
        std::vector<Vec2> out;
        for (; i >= 0; i = parent[static_cast<std::size_t>(i)])
            out.push_back(nodes[static_cast<std::size_t>(i)]);
        return out;
    }
};

enum class Extend { Trapped, Advanced, Reached };

Extend extend(const Task &task, Tree &tree, Vec2 q, double step) {
    int near = tree.nearest(q);
    Vec2 from = tree.nodes[static_cast<std::size_t>(near)];
    double d = distance(from, q);
    Vec2 to = d <= step ? q : from + (step / d) * (q - from);
    if (!segment_valid(task, from, to))
        return Extend::Trapped;
    tree.nodes.push_back(to);
    tree.parent.push_back(near);
    return d <= step ? Extend::Reached : Extend::Advanced;
}

}  // namespace

double path_length(const std::vector<Pose2> &path) {
    double len = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i)
        len += distance(path[i - 1].position(), path[i].position());
    return len;
}

std::vector<Pose2> plan_base_path(const Task &task, const Pose2 &from, const Pose2 &to, Rng &rng,
                                  const ExecParams &params, std::uint64_t *iterations) {
    Vec2 start = from.position(), goal = to.position();
    if (!base_valid(task, start) || !base_valid(task, goal))
        return {};
    if (start == goal || segment_valid(task, start, goal))
        return {from, to};

    Tree a{{start}, {-1}}, b{{goal}, {-1}};
    bool a_is_start = true;
    std::vector<Vec2> points;
    const Rect &arena = task.arena;
    const double m = task.robot.base_radius;
    int used = 0;
    while (used < params.iter_cap && points.empty()) {
        Vec2 q = rng.unit() < params.goal_bias
                     ? b.nodes[0]
                     : Vec2{rng.uniform(arena.min_x() + m, arena.max_x() - m),
                            rng.uniform(arena.min_y() + m, arena.max_y() - m)};
        ++used;
        if (extend(task, a, q, params.step) != Extend::Trapped) {
            Vec2 target = a.nodes.back();
            Extend r = Extend::Advanced;
            while (r == Extend::Advanced && used < params.iter_cap) {
                ++used;
                r = extend(task, b, target, params.step);
            }
            if (r == Extend::Reached) {
                auto pa = a.branch(static_cast<int>(a.nodes.size()) - 1);
                auto pb = b.branch(static_cast<int>(b.nodes.size()) - 1);
                std::reverse(pa.begin(), pa.end());
                pa.insert(pa.end(), pb.begin() + 1, pb.end());
                if (!a_is_start)
                    std::reverse(pa.begin(), pa.end());
                points = std::move(pa);
            }
        }
        std::swap(a, b);
        a_is_start = !a_is_start;
    }
    if (iterations)
        *iterations += static_cast<std::uint64_t>(used);
    if (points.empty())
        return {};

    for (int i = 0; i < params.shortcut_attempts && points.size() > 2; ++i) {
        std::size_t x = rng.below(points.size()), y = rng.below(points.size());
        if (x > y)
            std::swap(x, y);
        if (y - x < 2)
            continue;
        if (segment_valid(task, points[x], points[y]))
            points.erase(points.begin() + static_cast<long>(x) + 1, points.begin() + static_cast<long>(y));
    }

    std::vector<Pose2> path;
    path.push_back(from);
    for (std::size_t i = 1; i + 1 < points.size(); ++i)
        path.emplace_back(points[i].x, points[i].y, bearing(points[i - 1], points[i]));
    path.push_back(to);
    return path;
}

std::optional<MotionPlan> motion_plan(const Task &task, const WorldState &state, const ConcreteAction &action,
                                      Rng &rng, const ExecParams &params, PipelineStats *stats) {
    std::uint64_t iterations = 0, tests = 0;
    auto finish = [&](std::optional<MotionPlan> plan) {
        if (stats) {
            stats->rrt_iterations += iterations;
            stats->corridor_tests += tests;
        }
        return plan;
    };
    MotionPlan plan{{}, action, {}, 0.0};
    Pose2 from = state.base, to = state.base;
    if (const auto *mb = std::get_if<MoveBaseMotion>(&action)) {
        from = mb->from;
        to = mb->to;
    } else {
        to = action_base(action);
    }
    if (from.x != to.x || from.y != to.y || std::holds_alternative<MoveBaseMotion>(action)) {
        plan.base_path = plan_base_path(task, from, to, rng, params, &iterations);
        if (plan.base_path.empty())
            return finish(std::nullopt);
    }
    if (!std::holds_alternative<MoveBaseMotion>(action)) {
        if (!inverse_kinematics(task, state, action, params.ik_budget, &tests))
            return finish(std::nullopt);
        plan.cost = kManipulationCost;
    }
    plan.cost += path_length(plan.base_path);
    try {
        plan.end_state = apply(task, state, action);
    } catch (const InvariantViolation &) {
        return finish(std::nullopt);
    }
    return finish(std::move(plan));
}

std::uint64_t motion_seed(std::uint64_t run_seed, const WorldState &state, const ConcreteAction &action) {
    std::uint64_t h = hash_combine(run_seed, action.index());
    auto pose = [&](const Pose2 &p) {
        h = hash_combine(h, hash_double(p.x));
        h = hash_combine(h, hash_double(p.y));
        h = hash_combine(h, hash_double(p.theta));
    };
    pose(state.base);
    std::visit(
        [&](const auto &m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, PickMotion>) {
                h = hash_combine(h, static_cast<std::uint64_t>(m.object));
                h = hash_combine(h, hash_double(m.grasp));
                pose(m.base);
            } else if constexpr (std::is_same_v<T, PlaceMotion>) {
                h = hash_combine(h, static_cast<std::uint64_t>(m.object));
                pose(m.placement);
                h = hash_combine(h, static_cast<std::uint64_t>(m.table));
                pose(m.base);
            } else {
                pose(m.from);
                pose(m.to);
            }
        },
        action);
    return h;
}

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::optional<MotionPlan> run_stage3(const Task &task, const WorldState &state, const ConcreteAction &action,
                                     PipelineStats &stats, const ExecParams &params, std::uint64_t run_seed) {
    bool nav = std::holds_alternative<MoveBaseMotion>(action);
    StageCounter &counter = nav ? stats.navigation : stats.stages[2];
    auto t0 = Clock::now();
    Rng rng(motion_seed(run_seed, state, action));
    ++counter.calls;
    auto plan = motion_plan(task, state, action, rng, params, &stats);
    if (plan)
        ++counter.passes;
    counter.seconds += since(t0);
    return plan;
}

}  // namespace

ValidationResult validate(const Task &task, const WorldState &state, const ConcreteAction &action,
                          ValidationMode mode, PipelineStats &stats, const ExecParams &params,
                          std::uint64_t run_seed) {
    ValidationResult res;
    if (!std::holds_alternative<MoveBaseMotion>(action)) {
        auto t0 = Clock::now();
        ++stats.stages[0].calls;
        bool ok = in_arm_workspace(task, state, action);
        stats.stages[0].seconds += since(t0);
        if (!ok) {
            res.failed_stage = 1;
            return res;
        }
        ++stats.stages[0].passes;

        t0 = Clock::now();
        ++stats.stages[1].calls;
        ok = inverse_kinematics(task, state, action, params.ik_budget, &stats.corridor_tests);
        stats.stages[1].seconds += since(t0);
        if (!ok) {
            res.failed_stage = 2;
            return res;
        }
        ++stats.stages[1].passes;
    }
    if (mode == ValidationMode::Lazy) {
        res.verdict = Verdict::ProvisionallyFeasible;
        return res;
    }
    res.plan = run_stage3(task, state, action, stats, params, run_seed);
    if (res.plan) {
        res.verdict = Verdict::Feasible;
    } else {
        res.failed_stage = 3;
    }
    return res;
}

std::optional<MotionPlan> confirm(const Task &task, const WorldState &state, const ConcreteAction &action,
                                  PipelineStats &stats, const ExecParams &params, std::uint64_t run_seed) {
    return run_stage3(task, state, action, stats, params, run_seed);
}

}  // namespace sketchplan
