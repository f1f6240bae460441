#pragma once

#include "sketchplan/novelty.hpp"

#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace sketchplan {

using StateId = int;
/// Opaque action handle, meaningful to the SearchSpace that produced it.
using ActionId = std::uint64_t;

struct Successor {
    ActionId action = 0;
    StateId target = 0;
    double cost = 0.0;
    bool confirmed = false;  // already fully validated
};

/// State graph explored by LazyIw. States are interned to ids by the space.
class SearchSpace {
public:
    virtual ~SearchSpace() = default;
    virtual std::vector<Atom> atoms(StateId s) = 0;
    virtual std::vector<Successor> successors(StateId s) = 0;
    /// Full validation of a provisional edge.
    virtual bool confirm(StateId parent, const Successor &edge) = 0;
    virtual bool is_subgoal(StateId s) = 0;
};

enum class NodeStatus { Open, Closed, Pruned, Orphan, Goal };

struct SearchEdge {
    NodeId parent = -1;
    ActionId action = 0;
    double cost = 0.0;
    bool confirmed = false;
};

struct SearchNode {
    StateId state = 0;
    std::vector<SearchEdge> parents;
    std::vector<NodeId> children;
    NodeStatus status = NodeStatus::Open;
    NodeStatus prev_status = NodeStatus::Open;
    double g = std::numeric_limits<double>::infinity();
    std::optional<NodeId> connected_to_goal;
    std::vector<Tuple> tuples;
    bool in_open = false;
};

struct PlanStep {
    StateId from = 0;
    ActionId action = 0;
    StateId to = 0;
};

/// How the search recovers from a failed edge. Local retracts the orphaned
/// nodes' novelty support and promotes backups in place. Replay rebuilds the
/// search from the root over memoized expansions and confirmations, which
/// reproduces exactly the run that never saw the failed edge.
enum class RepairMode { Local, Replay };

struct SearchCounters {
    std::uint64_t expanded = 0;
    std::uint64_t generated = 0;
    std::uint64_t failed_edges = 0;
    std::uint64_t recovered = 0;
    std::uint64_t plan_attempts = 0;
    std::uint64_t replays = 0;
};

/// One IW(k) search with provisional edges, multi-parent nodes, backward
/// plan confirmation and incremental novelty repair.
class LazyIw {
public:
    LazyIw(SearchSpace &space, int k, std::uint64_t max_expansions = 0, RepairMode repair = RepairMode::Replay);

    void start(StateId root);
    /// Expands until a confirmed plan to a subgoal node is found or open runs dry.
    std::optional<std::vector<PlanStep>> run();

    /// Removes an edge and repairs costs and novelty (Replay mode defers the
    /// rebuild to the next run()).
    void invalidate_edge(NodeId child, std::size_t parent_index);
    /// Same, addressed by endpoints and action; false if no such edge.
    bool invalidate_edge(StateId parent, ActionId action, StateId child);

    const std::vector<SearchNode> &nodes() const { return nodes_; }
    const NoveltyTable &table() const { return table_; }
    const std::deque<NodeId> &open() const { return open_; }
    std::optional<NodeId> node_of(StateId s) const;
    const SearchCounters &counters() const { return counters_; }
    bool exhausted() const { return exhausted_; }

    /// Index of the parent edge on the current best path (ties: first listed).
    std::optional<std::size_t> best_parent(NodeId n) const;
    /// Checks g-consistency and novelty-table soundness; returns the first problem.
    std::optional<std::string> audit() const;

private:
    struct Memo {
        std::vector<Tuple> tuples;
        bool subgoal = false;
        std::optional<std::vector<Successor>> successors;
    };

    Memo &memo(StateId s);
    void init_root();
    void rebuild();
    /// Drops the edge from the memo; the next run() replays without it.
    void forget_edge(StateId parent, ActionId action, StateId child);
    NodeId add_node(StateId s);
    void push_back_open(NodeId n);
    bool register_novelty(NodeId n);
    void expand(NodeId n);
    std::optional<std::vector<PlanStep>> merge(NodeId parent, const Successor &succ, NodeId existing);
    std::optional<std::vector<PlanStep>> get_plan(NodeId goal);
    void propagate_decrease(NodeId from);
    void reconnect(const std::vector<NodeId> &nodes);
    void orphan(const std::vector<NodeId> &nodes);

    SearchSpace &space_;
    int k_;
    std::uint64_t max_expansions_;
    RepairMode repair_;
    std::unordered_map<StateId, Memo> memo_;
    bool restart_ = false;
    std::vector<SearchNode> nodes_;
    std::unordered_map<StateId, NodeId> index_;
    NoveltyTable table_;
    std::deque<NodeId> open_;
    NodeId root_ = -1;
    StateId root_state_ = 0;
    SearchCounters counters_;
    bool exhausted_ = false;
};

struct SearchResult {
    std::optional<std::vector<PlanStep>> plan;
    int width = 0;  // k of the successful (or last) iteration
    SearchCounters counters;
};

/// IW(1), IW(2), ... up to `k_max` until one returns a plan.
SearchResult lazy_iw(SearchSpace &space, StateId start, int k_max, std::uint64_t max_expansions = 0,
                     RepairMode repair = RepairMode::Replay);

}  // namespace sketchplan
