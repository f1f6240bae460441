#pragma once

#include "sketchplan/lazy_iw.hpp"
#include "sketchplan/rng.hpp"

#include <set>
#include <utility>
#include <vector>

namespace scripted {

using namespace sketchplan;

/// Explicit graph with per-state atoms and edges that fail on confirmation.
struct Graph {
    std::vector<std::vector<Atom>> atoms;
    std::vector<std::vector<Successor>> out;
    std::set<StateId> goals;
    std::set<std::pair<StateId, ActionId>> failing;

    StateId add_state(std::vector<Atom> a) {
        atoms.push_back(std::move(a));
        out.emplace_back();
        return static_cast<StateId>(atoms.size() - 1);
    }
    ActionId edge(StateId from, StateId to, double cost = 1.0, bool fails = false) {
        ActionId a = static_cast<ActionId>(from) * 1000 + out[static_cast<std::size_t>(from)].size();
        out[static_cast<std::size_t>(from)].push_back({a, to, cost, false});
        if (fails)
            failing.insert({from, a});
        return a;
    }
};

class Space : public SearchSpace {
public:
    /// With `drop_failing` the failing edges are simply absent.
    Space(const Graph &g, bool drop_failing) : g_(g), drop_(drop_failing) {}

    std::vector<Atom> atoms(StateId s) override { return g_.atoms.at(static_cast<std::size_t>(s)); }
    std::vector<Successor> successors(StateId s) override {
        std::vector<Successor> r;
        for (const Successor &e : g_.out.at(static_cast<std::size_t>(s)))
            if (!(drop_ && g_.failing.contains({s, e.action})))
                r.push_back(e);
        return r;
    }
    bool confirm(StateId parent, const Successor &e) override {
        ++confirmations;
        if (!g_.failing.contains({parent, e.action}))
            return true;
        refused.insert({parent, e.action});
        return false;
    }
    bool is_subgoal(StateId s) override { return g_.goals.contains(s); }

    int confirmations = 0;
    std::set<std::pair<StateId, ActionId>> refused;

private:
    const Graph &g_;
    bool drop_;
};

/// Random graph: up to `max_nodes` states, 1-3 atoms from a small pool,
/// 1-3 out edges, roughly one edge in five failing.
inline Graph random_graph(std::uint64_t seed, int max_nodes, bool with_goals) {
    Rng r(seed);
    Graph g;
    int n = 5 + static_cast<int>(r.below(static_cast<std::uint64_t>(max_nodes - 4)));
    std::uint64_t pool = 4 + r.below(12);
    for (int s = 0; s < n; ++s) {
        std::vector<Atom> a;
        int na = 1 + static_cast<int>(r.below(3));
        for (int i = 0; i < na; ++i)
            a.push_back(r.below(pool));
        g.add_state(std::move(a));
    }
    for (int s = 0; s < n; ++s) {
        int d = 1 + static_cast<int>(r.below(3));
        for (int e = 0; e < d; ++e) {
            StateId to = static_cast<StateId>(r.below(static_cast<std::uint64_t>(n)));
            g.edge(s, to, 1.0 + static_cast<double>(r.below(3)), r.unit() < 0.2);
        }
    }
    if (with_goals)
        for (int s = 1; s < n; ++s)
            if (r.unit() < 0.15)
                g.goals.insert(s);
    return g;
}

}  // namespace scripted
