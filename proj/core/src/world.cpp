#include "sketchplan/world.hpp"

#include <algorithm>
#include <sstream>

namespace sketchplan {

std::string to_string(Family f) {
    switch (f) {
    case Family::Sorting: return "sorting";
    case Family::NonMonotonic: return "nonmonotonic";
    case Family::Words: return "words";
    }
    return "sorting";
}

Family family_from_string(const std::string &s) {
    if (s == "sorting")
        return Family::Sorting;
    if (s == "nonmonotonic" || s == "non-monotonic")
        return Family::NonMonotonic;
    if (s == "words")
        return Family::Words;
    throw std::invalid_argument("unknown family '" + s + "'");
}

std::optional<int> Task::table_at(Vec2 p) const {
    for (const Table &t : tables)
        if (t.rect.contains(p))
            return t.id;
    return std::nullopt;
}

Pose2 action_base(const ConcreteAction &a) {
    return std::visit(
        [](const auto &m) -> Pose2 {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, MoveBaseMotion>)
                return m.to;
            else
                return m.base;
        },
        a);
}

std::string action_name(const ConcreteAction &a) {
    switch (a.index()) {
    case 0: return "pick";
    case 1: return "place";
    default: return "move_base";
    }
}

namespace {

bool disc_on_table(const Table &table, Vec2 c, double radius) {
    return table.rect.contains(c, radius - kOverlapEpsilon);
}

bool discs_overlap(Vec2 a, double ra, Vec2 b, double rb) {
    return distance(a, b) < ra + rb - kOverlapEpsilon;
}

}  // namespace

bool placement_free(const Task &task, const WorldState &state, const Table &table, const Pose2 &pose,
                    double radius, std::optional<ObjectId> ignore) {
    if (!pose.finite())
        return false;
    Vec2 c = pose.position();
    if (!disc_on_table(table, c, radius))
        return false;
    for (const auto &[id, p] : state.object_poses) {
        if (ignore && *ignore == id)
            continue;
        if (discs_overlap(c, radius, p.position(), task.object(id).radius))
            return false;
    }
    return true;
}

std::optional<std::string> check_state(const Task &task, const WorldState &state) {
    std::ostringstream err;
    if (!state.base.finite())
        return "base pose not finite";
    for (const Table &t : task.tables) {
        if (disc_intersects_rect(state.base.position(), task.robot.base_radius - kOverlapEpsilon, t.rect)) {
            err << "robot base intersects table " << t.id;
            return err.str();
        }
    }
    if (!task.arena.contains(state.base.position(), task.robot.base_radius - kOverlapEpsilon))
        return "robot base outside arena";
    for (const MovableObject &o : task.objects) {
        bool held = state.held && state.held->object == o.id;
        bool standing = state.object_poses.contains(o.id);
        if (held && standing) {
            err << "held object " << o.id << " also has a pose";
            return err.str();
        }
        if (!held && !standing) {
            err << "object " << o.id << " neither held nor standing";
            return err.str();
        }
    }
    for (const auto &[id, p] : state.object_poses) {
        if (id < 0 || static_cast<std::size_t>(id) >= task.objects.size()) {
            err << "unknown object id " << id;
            return err.str();
        }
        double r = task.object(id).radius;
        auto on = std::any_of(task.tables.begin(), task.tables.end(),
                              [&](const Table &t) { return disc_on_table(t, p.position(), r); });
        if (!on) {
            err << "object " << id << " not fully on a table";
            return err.str();
        }
        for (const auto &[id2, p2] : state.object_poses) {
            if (id2 <= id)
                continue;
            if (discs_overlap(p.position(), r, p2.position(), task.object(id2).radius)) {
                err << "objects " << id << " and " << id2 << " overlap";
                return err.str();
            }
        }
    }
    return std::nullopt;
}

WorldState apply(const Task &task, const WorldState &state, const ConcreteAction &action) {
    WorldState next = state;
    if (const auto *pick = std::get_if<PickMotion>(&action)) {
        if (state.held)
            throw InvariantViolation("pick while already holding an object");
        auto it = next.object_poses.find(pick->object);
        if (it == next.object_poses.end())
            throw InvariantViolation("pick of an object that is not standing");
        next.object_poses.erase(it);
        next.held = Held{pick->object, pick->grasp};
        next.base = pick->base;
    } else if (const auto *place = std::get_if<PlaceMotion>(&action)) {
        if (!state.held || state.held->object != place->object)
            throw InvariantViolation("place of an object that is not held");
        next.held.reset();
        next.object_poses[place->object] = place->placement;
        next.base = place->base;
    } else {
        next.base = std::get<MoveBaseMotion>(action).to;
    }
    if (auto err = check_state(task, next))
        throw InvariantViolation(*err);
    return next;
}

bool pose_satisfies_goal(const Task &task, const MovableObject &obj, const Pose2 &pose) {
    return std::visit(
        [&](const auto &g) -> bool {
            using T = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<T, GoalNone>)
                return true;
            else if constexpr (std::is_same_v<T, AbsoluteRegion>)
                return g.region.contains(pose.position()) &&
                       task.table(g.table_id).rect.contains(pose.position());
            else if constexpr (std::is_same_v<T, ExactPose>)
                return distance(pose.position(), g.pose.position()) <= g.tolerance;
            else
                return false;  // word goals depend on the other blocks
        },
        obj.goal);
}

double word_radius(const Task &task) {
    for (const MovableObject &o : task.objects)
        if (std::holds_alternative<RelativeWord>(o.goal))
            return o.radius;
    return task.objects.empty() ? 0.035 : task.objects.front().radius;
}

double word_pitch(const Task &task) { return task.word_layout.pitch_factor * word_radius(task); }
double word_tolerance(const Task &task) { return task.word_layout.tolerance_factor * word_radius(task); }

Vec2 word_slot_position(const Task &task, Vec2 anchor, int slot) {
    return {anchor.x + slot * word_pitch(task), anchor.y};
}

bool word_fits(const Task &task, const Table &table, Vec2 anchor) {
    if (task.word.empty())
        return false;
    double r = word_radius(task);
    double inset = r + task.word_layout.margin_factor * r;
    Vec2 last = word_slot_position(task, anchor, static_cast<int>(task.word.size()) - 1);
    return table.rect.contains(anchor, inset - kOverlapEpsilon) &&
           table.rect.contains(last, inset - kOverlapEpsilon);
}

WordPrefix words_valid_prefix_detail(const WorldState &state, const Task &task) {
    WordPrefix best;
    if (task.word.empty())
        return best;
    double tol = word_tolerance(task);
    auto label_is = [&](ObjectId id, char c) {
        const std::string &l = task.object(id).label;
        return l.size() == 1 && l[0] == c;
    };
    for (const auto &[anchor_id, anchor_pose] : state.object_poses) {
        if (!label_is(anchor_id, task.word[0]))
            continue;
        Vec2 anchor = anchor_pose.position();
        auto table = task.table_at(anchor);
        if (!table || !word_fits(task, task.table(*table), anchor))
            continue;
        std::vector<WordSlotAssignment> chain{{anchor_id, 0}};
        std::set<ObjectId> used{anchor_id};
        for (int slot = 1; slot < static_cast<int>(task.word.size()); ++slot) {
            Vec2 want = word_slot_position(task, anchor, slot);
            std::optional<ObjectId> pick;
            double best_d = tol;
            for (const auto &[id, p] : state.object_poses) {
                if (used.contains(id) || !label_is(id, task.word[static_cast<std::size_t>(slot)]))
                    continue;
                double d = distance(p.position(), want);
                if (d <= best_d) {
                    best_d = d;
                    pick = id;
                }
            }
            if (!pick)
                break;
            used.insert(*pick);
            chain.push_back({*pick, slot});
        }
        bool longer = chain.size() > best.blocks.size();
        bool tie_left = chain.size() == best.blocks.size() &&
                        (anchor.x < best.anchor.x || (anchor.x == best.anchor.x && anchor.y < best.anchor.y));
        if (longer || tie_left) {
            best.blocks = std::move(chain);
            best.anchor = anchor;
        }
    }
    return best;
}

std::vector<WordSlotAssignment> words_valid_prefix(const WorldState &state, const Task &task) {
    return words_valid_prefix_detail(state, task).blocks;
}

std::set<ObjectId> misplaced_set(const WorldState &state, const Task &task, const HeldGoalBlocked &held_blocked) {
    std::set<ObjectId> out;
    std::set<ObjectId> in_word;
    if (task.family == Family::Words)
        for (const auto &a : words_valid_prefix(state, task))
            in_word.insert(a.object);
    for (const auto &[id, pose] : state.object_poses) {
        const MovableObject &o = task.object(id);
        if (!has_goal(o.goal))
            continue;
        if (std::holds_alternative<RelativeWord>(o.goal)) {
            if (!in_word.contains(id))
                out.insert(id);
        } else if (!pose_satisfies_goal(task, o, pose)) {
            out.insert(id);
        }
    }
    if (state.held && has_goal(task.object(state.held->object).goal) && held_blocked &&
        held_blocked(state, state.held->object))
        out.insert(state.held->object);
    return out;
}

bool is_goal(const WorldState &state, const Task &task) {
    return !state.held && misplaced_set(state, task).empty();
}

}  // namespace sketchplan
