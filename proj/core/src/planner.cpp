#include "sketchplan/planner.hpp"
#include "sketchplan/tamp_space.hpp"

#include <bit>
#include <chrono>
#include <functional>
#include <map>
#include <memory>

namespace sketchplan {

std::string to_string(PlannerKind p) {
    switch (p) {
    case PlannerKind::LazySiiwr: return "lazy-siiwr";
    case PlannerKind::SiwrFull: return "siwr-full";
    case PlannerKind::SiwBaseline: return "siw-baseline";
    }
    return "?";
}

PlannerKind planner_from_string(const std::string &s) {
    if (s == "lazy-siiwr")
        return PlannerKind::LazySiiwr;
    if (s == "siwr-full")
        return PlannerKind::SiwrFull;
    if (s == "siw-baseline")
        return PlannerKind::SiwBaseline;
    throw std::invalid_argument("unknown planner '" + s + "'");
}

std::uint64_t subproblem_seed(std::uint64_t seed, int subproblem, int attempt) {
    return hash_combine(hash_combine(hash_combine(seed, 0x5eed), static_cast<std::uint64_t>(subproblem)),
                        static_cast<std::uint64_t>(attempt));
}

std::uint64_t exec_seed(std::uint64_t seed) { return hash_combine(seed, 0xe7ec); }

namespace {

enum class Guidance { Sketch, GoalCount };

RunResult serialized_iw(const Task &task, const PlannerConfig &config, Guidance guidance) {
    auto t0 = std::chrono::steady_clock::now();
    RunResult out;
    RunMetrics &metrics = out.metrics;
    Plan plan;
    plan.states.push_back(task.start);
    WorldState state = task.start;
    const ValidationMode mode =
        config.planner == PlannerKind::SiwrFull ? ValidationMode::Full : ValidationMode::Lazy;
    const std::uint64_t run_seed = exec_seed(config.seed);
    const int k_max = static_cast<int>(task.objects.size()) + 1;
    std::optional<std::vector<Pose2>> kept_bases;

    auto finish = [&](bool success, std::string failure) {
        metrics.success = success;
        metrics.failure = std::move(failure);
        metrics.subplans = static_cast<int>(plan.subplans.size());
        metrics.plan_actions = static_cast<int>(plan.actions.size());
        metrics.plan_cost = plan.total_cost;
        metrics.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (success)
            out.plan = std::move(plan);
        return std::move(out);
    };

    try {
        for (int index = 0; !is_goal(state, task); ++index) {
            if (index >= config.max_subproblems)
                return finish(false, "subproblem limit reached");
            SamplingDensity density = config.density;
            std::optional<std::vector<PlanStep>> steps;
            SubplanRecord record;
            std::optional<SampleSet> samples;
            std::unique_ptr<TampSpace> space;
            std::optional<FeatureEvaluator> eval;
            for (int attempt = 1;; ++attempt) {
                bool reuse = attempt == 1 && kept_bases.has_value();
                samples.emplace(make_samples(task, state, density, subproblem_seed(config.seed, index, density.attempt),
                                             reuse ? &*kept_bases : nullptr));
                eval.emplace(task, *samples);
                Subgoal subgoal;
                if (guidance == Guidance::Sketch) {
                    FeatureVec f = eval->features(state);
                    const SketchRule &rule = active_rule(config.sketch, f);
                    record.rule = rule.id;
                    record.before = f;
                    bool needs_I = rule_needs_I(rule);
                    const FeatureEvaluator *ev = &*eval;
                    subgoal = [&task, ev, rule, f, needs_I](const WorldState &s) {
                        if (is_goal(s, task))
                            return true;
                        FeatureVec f2 = ev->features(s, false);
                        if (!needs_I)
                            return pair_satisfies(rule, f, f2);
                        // decide on the cheap features first
                        f2.I = rule.eff[static_cast<std::size_t>(Feature::I)] == Effect::SetTrue ||
                               (rule.eff[static_cast<std::size_t>(Feature::I)] == Effect::Same && f.I);
                        if (!pair_satisfies(rule, f, f2))
                            return false;
                        f2.I = f2.H && ev->compute_I(s);
                        return pair_satisfies(rule, f, f2);
                    };
                } else {
                    std::size_t before = misplaced_set(state, task).size();
                    record.before = eval->features(state, false);
                    subgoal = [&task, before](const WorldState &s) {
                        return is_goal(s, task) || (!s.held && misplaced_set(s, task).size() < before);
                    };
                }
                space = std::make_unique<TampSpace>(task, *samples, mode, metrics.stats, config.exec, run_seed,
                                                    std::move(subgoal));
                StateId root = space->intern(state);
                // wider searches only once sampling cannot escalate any further
                const bool last_round = density.attempt >= config.escalation_max;
                SearchResult res =
                    lazy_iw(*space, root, last_round ? k_max : 1, config.max_expansions, config.repair);
                metrics.expanded_nodes += res.counters.expanded;
                metrics.generated_nodes += res.counters.generated;
                metrics.failed_edges += res.counters.failed_edges;
                metrics.replays += res.counters.replays;
                metrics.max_width = std::max(metrics.max_width, res.width);
                record.width = res.width;
                record.attempts = attempt;
                if (res.plan) {
                    steps = std::move(res.plan);
                    break;
                }
                density = escalate(density, config.escalation_max, config.uncapped);
                ++metrics.escalations;
            }
            if (steps->empty())
                return finish(false, "subgoal holds without progress at subproblem " + std::to_string(index));
            kept_bases = samples->bases;
            record.first_action = plan.actions.size();
            record.n_actions = steps->size();
            for (const PlanStep &step : *steps) {
                const MotionPlan &m = space->motion(step.action);
                plan.actions.push_back(m);
                plan.states.push_back(m.end_state);
                plan.total_cost += m.cost;
            }
            state = plan.states.back();
            record.after = eval->features(state);
            plan.subplans.push_back(record);
        }
    } catch (const DensityCapReached &e) {
        return finish(false, e.what());
    } catch (const NoApplicableRule &e) {
        return finish(false, e.what());
    }
    return finish(true, "");
}

}  // namespace

RunResult siwr(const Task &task, const PlannerConfig &config) {
    return serialized_iw(task, config, Guidance::Sketch);
}

RunResult siw_baseline(const Task &task, const PlannerConfig &config) {
    return serialized_iw(task, config, Guidance::GoalCount);
}

RunResult solve(const Task &task, const PlannerConfig &config) {
    return config.planner == PlannerKind::SiwBaseline ? siw_baseline(task, config) : siwr(task, config);
}

}  // namespace sketchplan
