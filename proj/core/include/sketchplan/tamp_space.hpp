#pragma once

#include "sketchplan/exec.hpp"
#include "sketchplan/lazy_iw.hpp"
#include "sketchplan/sampler.hpp"

#include <bit>
#include <functional>
#include <map>
#include <optional>
#include <vector>

namespace sketchplan {

using Subgoal = std::function<bool(const WorldState &)>;

/// Search space over WorldStates reachable with one subproblem's samples.
class TampSpace : public SearchSpace {
public:
    TampSpace(const Task &task, const SampleSet &samples, ValidationMode mode, PipelineStats &stats,
              const ExecParams &params, std::uint64_t run_seed, Subgoal subgoal)
        : task_(task), samples_(samples), mode_(mode), stats_(stats), params_(params), run_seed_(run_seed),
          subgoal_(std::move(subgoal)) {}

    StateId intern(const WorldState &s) {
        auto key = state_key(s);
        auto [it, inserted] = ids_.try_emplace(std::move(key), static_cast<StateId>(states_.size()));
        if (inserted)
            states_.push_back(s);
        return it->second;
    }
    const WorldState &state(StateId id) const { return states_.at(static_cast<std::size_t>(id)); }
    const MotionPlan &motion(ActionId a) const { return *edges_.at(a).motion; }
    std::size_t state_count() const { return states_.size(); }

    std::vector<Atom> atoms(StateId id) override {
        const WorldState &s = state(id);
        std::vector<Atom> out;
        auto base = samples_.base_index(s.base);
        out.push_back(robot_at(base.value_or(-1)));
        for (const auto &[o, p] : s.object_poses) {
            auto ref = samples_.placement_ref(p);
            out.push_back(object_at(o, ref ? static_cast<std::uint32_t>(samples_.flat_index(*ref)) : kHeldPlacement - 1));
        }
        if (s.held)
            out.push_back(object_at(s.held->object, kHeldPlacement));
        return out;
    }

    std::vector<Successor> successors(StateId id) override {
        std::vector<Successor> out;
        const WorldState s = state(id);
        for (const GroundAction &ga : ground_actions(s, samples_, task_)) {
            ConcreteAction ca = resolve(samples_, ga);
            ValidationResult res = validate(task_, s, ca, mode_, stats_, params_, run_seed_);
            if (res.verdict == Verdict::Infeasible)
                continue;
            WorldState next;
            if (res.plan) {
                next = res.plan->end_state;
            } else {
                try {
                    next = apply(task_, s, ca);
                } catch (const InvariantViolation &) {
                    continue;
                }
            }
            ActionId a = edges_.size();
            edges_.push_back({id, ca, res.plan});
            out.push_back({a, intern(next), estimate(s, ca), res.plan.has_value()});
        }
        return out;
    }

    bool confirm(StateId parent, const Successor &edge) override {
        Edge &e = edges_.at(edge.action);
        if (e.motion)
            return true;
        e.motion = sketchplan::confirm(task_, state(parent), e.action, stats_, params_, run_seed_);
        return e.motion.has_value();
    }

    bool is_subgoal(StateId id) override { return subgoal_(state(id)); }

private:
    struct Edge {
        StateId from;
        ConcreteAction action;
        std::optional<MotionPlan> motion;
    };

    static double estimate(const WorldState &s, const ConcreteAction &a) {
        if (const auto *m = std::get_if<MoveBaseMotion>(&a))
            return distance(m->from.position(), m->to.position());
        return kManipulationCost + distance(s.base.position(), action_base(a).position());
    }

    static std::vector<std::uint64_t> state_key(const WorldState &s) {
        auto bits = [](double d) { return std::bit_cast<std::uint64_t>(d); };
        std::vector<std::uint64_t> key{bits(s.base.x), bits(s.base.y), bits(s.base.theta)};
        key.push_back(s.held ? static_cast<std::uint64_t>(s.held->object) : ~std::uint64_t{0});
        key.push_back(s.held ? bits(s.held->grasp) : 0);
        for (const auto &[o, p] : s.object_poses) {
            key.push_back(static_cast<std::uint64_t>(o));
            key.push_back(bits(p.x));
            key.push_back(bits(p.y));
            key.push_back(bits(p.theta));
        }
        return key;
    }

    const Task &task_;
    const SampleSet &samples_;
    ValidationMode mode_;
    PipelineStats &stats_;
    ExecParams params_;
    std::uint64_t run_seed_;
    Subgoal subgoal_;
    std::vector<WorldState> states_;
    std::map<std::vector<std::uint64_t>, StateId> ids_;
    std::vector<Edge> edges_;
};

}  // namespace sketchplan
