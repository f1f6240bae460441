#pragma once

#include "sketchplan/exec.hpp"
#include "sketchplan/lazy_iw.hpp"
#include "sketchplan/sampler.hpp"
#include "sketchplan/sketch.hpp"
#include "sketchplan/world.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sketchplan {

enum class PlannerKind { LazySiiwr, SiwrFull, SiwBaseline };

std::string to_string(PlannerKind p);
PlannerKind planner_from_string(const std::string &s);

struct PlannerConfig {
    PlannerKind planner = PlannerKind::LazySiiwr;
    std::uint64_t seed = 0;
    SamplingDensity density;
    int escalation_max = 8;
    bool uncapped = false;
    ExecParams exec;
    int max_subproblems = 200;
    std::uint64_t max_expansions = 2000;  // per IW(k) run
    RepairMode repair = RepairMode::Replay;
    Sketch sketch = default_sketch();
};

struct SubplanRecord {
    std::size_t first_action = 0;
    std::size_t n_actions = 0;
    std::string rule;  // empty for the goal-counting baseline
    FeatureVec before;
    FeatureVec after;
    int width = 1;
    int attempts = 1;
};

struct Plan {
    std::vector<MotionPlan> actions;
    std::vector<WorldState> states;  // states.size() == actions.size() + 1
    std::vector<SubplanRecord> subplans;
    double total_cost = 0.0;
};

struct RunMetrics {
    bool success = false;
    std::string failure;
    std::uint64_t expanded_nodes = 0;
    std::uint64_t generated_nodes = 0;
    int subplans = 0;
    int plan_actions = 0;
    double plan_cost = 0.0;
    PipelineStats stats;
    int escalations = 0;
    int max_width = 0;
    std::uint64_t failed_edges = 0;
    std::uint64_t replays = 0;
    double seconds = 0.0;  // wall time, reported in CSV only

    std::uint64_t planning_units() const { return stats.rrt_iterations + stats.corridor_tests; }
};

struct RunResult {
    std::optional<Plan> plan;
    RunMetrics metrics;
};

/// Sketch-guided serialized IW. Lazy or full validation follows config.planner.
RunResult siwr(const Task &task, const PlannerConfig &config);
/// Serialized IW with goal counting: a subgoal is any hand-empty state with
/// fewer misplaced objects.
RunResult siw_baseline(const Task &task, const PlannerConfig &config);
RunResult solve(const Task &task, const PlannerConfig &config);

/// Per-subproblem sampling seed.
std::uint64_t subproblem_seed(std::uint64_t seed, int subproblem, int attempt);
/// Seed of the motion-planning streams for a run.
std::uint64_t exec_seed(std::uint64_t seed);

}  // namespace sketchplan
