#pragma once

#include "sketchplan/rng.hpp"
#include "sketchplan/world.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sketchplan {

inline constexpr double kCorridorClearance = 0.01;
/// Maximum |approach angle - bearing(base, target)| for a usable grasp.
inline constexpr double kGraspTolerance = std::numbers::pi / 3.0;
inline constexpr double kManipulationCost = 1.0;

struct ExecParams {
    int ik_budget = 64;
    int iter_cap = 2000;
    double step = 0.15;
    double goal_bias = 0.1;
    int shortcut_attempts = 50;
};

struct MotionPlan {
    std::vector<Pose2> base_path;
    ConcreteAction action;
    WorldState end_state;
    double cost = 0.0;
};

enum class Verdict { Feasible, Infeasible, ProvisionallyFeasible };
enum class ValidationMode { Lazy, Full };

struct ValidationResult {
    Verdict verdict = Verdict::Infeasible;
    int failed_stage = 0;  // 1..3 when Infeasible
    std::optional<MotionPlan> plan;
};

struct StageCounter {
    std::uint64_t calls = 0;
    std::uint64_t passes = 0;
    double seconds = 0.0;
};

/// Counters for the manipulation pipeline (stages 1-3) plus base navigation,
/// which enters at stage 3 directly and is tracked apart.
struct PipelineStats {
    std::array<StageCounter, 3> stages;
    StageCounter navigation;
    std::uint64_t corridor_tests = 0;
    std::uint64_t rrt_iterations = 0;

    void merge(const PipelineStats &other);
    /// Motion-planner invocations of any kind.
    std::uint64_t motion_plan_calls() const { return stages[2].calls + navigation.calls; }
    bool consistent() const;
};

/// CSV with columns stage,calls,passes,pass_ratio,cumulative_pass_ratio.
std::string stats_csv(const PipelineStats &stats);

/// Object or placement position targeted by a Pick/Place.
Vec2 action_target(const WorldState &state, const ConcreteAction &action);

/// Whether a disc at `c` with radius `r` enters the corridor of half width
/// `half_width` around segment [a, b].
bool disc_in_corridor(Vec2 a, Vec2 b, double half_width, Vec2 c, double r);

/// Point at reach_min along base->target where the approach corridor begins.
Vec2 gripper_start(const Task &task, Vec2 base, Vec2 target);

/// Whether the robot base disc at `base` overlaps any standing object.
bool base_hits_object(const Task &task, const WorldState &state, Vec2 base,
                      std::optional<ObjectId> ignore = std::nullopt);

/// Standing objects (except `ignore`) whose discs enter the approach corridor
/// from `base` to a disc of `radius` at `target`, as a bitmask over object ids.
std::uint64_t corridor_mask(const Task &task, const WorldState &state, Vec2 base, Vec2 target, double radius,
                            std::optional<ObjectId> ignore);

bool grasp_compatible(double grasp, Vec2 base, Vec2 target);

bool in_arm_workspace(const Task &task, const WorldState &state, const ConcreteAction &action);

/// Corridor clearance test standing in for inverse kinematics. Each object
/// examined costs one test; running past `budget` fails.
bool inverse_kinematics(const Task &task, const WorldState &state, const ConcreteAction &action, int budget,
                        std::uint64_t *tests = nullptr);

/// Collision-free base disc position (tables and arena only).
bool base_valid(const Task &task, Vec2 p);

/// RRT-Connect between base positions, shortcut-smoothed. Empty on failure.
std::vector<Pose2> plan_base_path(const Task &task, const Pose2 &from, const Pose2 &to, Rng &rng,
                                  const ExecParams &params, std::uint64_t *iterations = nullptr);

double path_length(const std::vector<Pose2> &path);

std::optional<MotionPlan> motion_plan(const Task &task, const WorldState &state, const ConcreteAction &action,
                                      Rng &rng, const ExecParams &params, PipelineStats *stats = nullptr);

/// Per-call motion planning seed derived from the run seed, state and action.
std::uint64_t motion_seed(std::uint64_t run_seed, const WorldState &state, const ConcreteAction &action);

ValidationResult validate(const Task &task, const WorldState &state, const ConcreteAction &action,
                          ValidationMode mode, PipelineStats &stats, const ExecParams &params,
                          std::uint64_t run_seed);

/// Stage 3 only, for an action already provisionally accepted.
std::optional<MotionPlan> confirm(const Task &task, const WorldState &state, const ConcreteAction &action,
                                  PipelineStats &stats, const ExecParams &params, std::uint64_t run_seed);

}  // namespace sketchplan
