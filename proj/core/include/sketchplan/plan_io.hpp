#pragma once

#include "sketchplan/planner.hpp"
#include "sketchplan/world.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sketchplan {

inline constexpr const char *kPlanFormat = "sketchplan-plan/1";
inline constexpr const char *kMetricsFormat = "sketchplan-metrics/1";

/// A plan as read back from disk. States are not stored; replay rebuilds them.
struct PlanDocument {
    std::uint64_t seed = 0;
    PlannerKind planner = PlannerKind::LazySiiwr;
    std::vector<MotionPlan> actions;  // end_state left empty
    std::vector<SubplanRecord> subplans;
    double total_cost = 0.0;
};

std::string plan_to_json(const Plan &plan, PlannerKind planner, std::uint64_t seed);
PlanDocument plan_from_json(const std::string &text);
PlanDocument to_document(const Plan &plan, PlannerKind planner, std::uint64_t seed);

/// Wall time is left out so the document is reproducible.
std::string metrics_to_json(const RunMetrics &m);

/// Column order is fixed within format version 1.
std::string metrics_csv_header();
std::string metrics_csv_row(const std::string &label, std::uint64_t seed, PlannerKind planner, const RunMetrics &m);

struct ReplayReport {
    bool ok = true;
    int index = -1;  // failing action, or actions.size() for a bad terminal state
    std::string message;
    std::vector<WorldState> states;
};

/// Re-applies every action with full validation and checks the end state.
ReplayReport replay(const Task &task, const PlanDocument &plan, const ExecParams &params = {});

/// States after each action, without validation. Throws InvariantViolation.
std::vector<WorldState> rollout(const Task &task, const std::vector<MotionPlan> &actions);

/// One SVG with a keyframe per state (start plus one per action).
std::string render_svg(const Task &task, const std::vector<WorldState> &states, const std::vector<MotionPlan> &actions);

}  // namespace sketchplan
