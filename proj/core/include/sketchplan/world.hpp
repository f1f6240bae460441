#pragma once

#include "sketchplan/geometry.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace sketchplan {

using ObjectId = int;

/// Object-object clearance slack for the "no overlap" test.
inline constexpr double kOverlapEpsilon = 1e-9;

class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Table {
    int id = 0;
    Rect rect;
    double support_height = 0.75;  // informational
};

struct GoalNone {
    friend bool operator==(const GoalNone &, const GoalNone &) = default;
};

struct AbsoluteRegion {
    int table_id = 0;
    Rect region;
    friend bool operator==(const AbsoluteRegion &, const AbsoluteRegion &) = default;
};

struct ExactPose {
    Pose2 pose;
    double tolerance = 0.0;
    friend bool operator==(const ExactPose &, const ExactPose &) = default;
};

/// Goal defined relative to the other letters of the task word. `slot` is the
/// first slot of the block's letter; repeated letters may fill any matching slot.
struct RelativeWord {
    int slot = 0;
    friend bool operator==(const RelativeWord &, const RelativeWord &) = default;
};

using GoalSpec = std::variant<GoalNone, AbsoluteRegion, ExactPose, RelativeWord>;

inline bool has_goal(const GoalSpec &g) { return !std::holds_alternative<GoalNone>(g); }

struct MovableObject {
    ObjectId id = 0;
    double radius = 0.035;
    std::string label;
    GoalSpec goal = GoalNone{};
};

struct RobotParams {
    double base_radius = 0.2;
    double reach_min = 0.2;
    double reach_max = 0.85;
    bool single_home_configuration = true;
};

struct Held {
    ObjectId object = 0;
    double grasp = 0.0;
    friend bool operator==(const Held &, const Held &) = default;
};

struct WorldState {
    Pose2 base;
    std::optional<Held> held;
    std::map<ObjectId, Pose2> object_poses;

    friend bool operator==(const WorldState &, const WorldState &) = default;
};

enum class Family { Sorting, NonMonotonic, Words };

std::string to_string(Family f);
Family family_from_string(const std::string &s);

/// Word layout constants, in multiples of the block radius.
struct WordLayout {
    double pitch_factor = 2.5;
    double tolerance_factor = 0.25;
    double margin_factor = 1.0;
};

struct Task {
    Rect arena;
    std::vector<Table> tables;
    std::vector<MovableObject> objects;
    RobotParams robot;
    WorldState start;
    Family family = Family::Sorting;
    std::string word;
    WordLayout word_layout;

    const MovableObject &object(ObjectId id) const { return objects.at(static_cast<std::size_t>(id)); }
    const Table &table(int id) const { return tables.at(static_cast<std::size_t>(id)); }
    /// Index of the table whose rect contains `p`, if any.
    std::optional<int> table_at(Vec2 p) const;
};

// Resolved (parameter-level) actions. The search works with sample indices;
// these carry the concrete poses so plans can be replayed without a sample set.
struct PickMotion {
    ObjectId object = 0;
    double grasp = 0.0;
    Pose2 base;
    friend bool operator==(const PickMotion &, const PickMotion &) = default;
};

struct PlaceMotion {
    ObjectId object = 0;
    Pose2 placement;
    int table = 0;
    int sop = 0;
    Pose2 base;
    friend bool operator==(const PlaceMotion &, const PlaceMotion &) = default;
};

struct MoveBaseMotion {
    Pose2 from;
    Pose2 to;
    friend bool operator==(const MoveBaseMotion &, const MoveBaseMotion &) = default;
};

using ConcreteAction = std::variant<PickMotion, PlaceMotion, MoveBaseMotion>;

/// Base pose the robot ends at after `a`.
Pose2 action_base(const ConcreteAction &a);
std::string action_name(const ConcreteAction &a);

/// A disc of `radius` at `pose` lies inside `table` and overlaps no standing
/// object (other than `ignore`).
bool placement_free(const Task &task, const WorldState &state, const Table &table, const Pose2 &pose,
                    double radius, std::optional<ObjectId> ignore = std::nullopt);

/// Returns a description of the first violated WorldState invariant, if any.
std::optional<std::string> check_state(const Task &task, const WorldState &state);

/// Transition function: the state reached when `action` is executed in `state`.
/// Throws InvariantViolation if the result breaks a WorldState invariant.
WorldState apply(const Task &task, const WorldState &state, const ConcreteAction &action);

/// Whether a standing object at `pose` satisfies its (non-word) goal.
bool pose_satisfies_goal(const Task &task, const MovableObject &obj, const Pose2 &pose);

struct WordSlotAssignment {
    ObjectId object;
    int slot;
    friend bool operator==(const WordSlotAssignment &, const WordSlotAssignment &) = default;
};

struct WordPrefix {
    std::vector<WordSlotAssignment> blocks;
    Vec2 anchor;  // position of slot 0 (meaningful when blocks non-empty)
};

double word_pitch(const Task &task);
double word_tolerance(const Task &task);
/// Word blocks share one radius; this is it.
double word_radius(const Task &task);
/// Whether a full word anchored at `anchor` fits on `table` with the edge margin.
bool word_fits(const Task &task, const Table &table, Vec2 anchor);
Vec2 word_slot_position(const Task &task, Vec2 anchor, int slot);

/// Longest valid placed prefix of the task word (ties: leftmost anchor).
WordPrefix words_valid_prefix_detail(const WorldState &state, const Task &task);
std::vector<WordSlotAssignment> words_valid_prefix(const WorldState &state, const Task &task);

/// Predicate telling whether the held object's goal is blocked; supplied by the
/// feature layer, which owns the corridor geometry and sample set.
using HeldGoalBlocked = std::function<bool(const WorldState &, ObjectId)>;

/// Misplaced goal objects: standing objects violating their goal, plus the held
/// object when `held_blocked` reports all its goal placements blocked.
std::set<ObjectId> misplaced_set(const WorldState &state, const Task &task,
                                 const HeldGoalBlocked &held_blocked = {});

bool is_goal(const WorldState &state, const Task &task);

}  // namespace sketchplan
