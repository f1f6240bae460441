#include "sketchplan/lazy_iw.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <stdexcept>

namespace sketchplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Item = std::pair<double, NodeId>;
using MinQueue = std::priority_queue<Item, std::vector<Item>, std::greater<>>;

}  // namespace

LazyIw::LazyIw(SearchSpace &space, int k, std::uint64_t max_expansions, RepairMode repair)
    : space_(space), k_(k), max_expansions_(max_expansions), repair_(repair) {
    if (k < 1)
        throw std::invalid_argument("width must be at least 1");
}

std::optional<NodeId> LazyIw::node_of(StateId s) const {
    auto it = index_.find(s);
    if (it == index_.end())
        return std::nullopt;
    return it->second;
}

LazyIw::Memo &LazyIw::memo(StateId s) {
    auto [it, inserted] = memo_.try_emplace(s);
    if (inserted) {
        it->second.tuples = make_tuples(space_.atoms(s), k_);
        it->second.subgoal = space_.is_subgoal(s);
        ++counters_.generated;
    }
    return it->second;
}

NodeId LazyIw::add_node(StateId s) {
    NodeId id = static_cast<NodeId>(nodes_.size());
    const Memo &m = memo(s);
    nodes_.emplace_back();
    nodes_.back().state = s;
    nodes_.back().tuples = m.tuples;
    index_[s] = id;
    return id;
}

void LazyIw::push_back_open(NodeId n) {
    nodes_[static_cast<std::size_t>(n)].in_open = true;
    open_.push_back(n);
}

bool LazyIw::register_novelty(NodeId n) { return table_.register_node(n, nodes_[static_cast<std::size_t>(n)].tuples); }

void LazyIw::start(StateId root) {
    memo_.clear();
    root_state_ = root;
    init_root();
}

void LazyIw::rebuild() {
    ++counters_.replays;
    init_root();
}

void LazyIw::init_root() {
    nodes_.clear();
    index_.clear();
    table_.clear();
    open_.clear();
    exhausted_ = false;
    restart_ = false;
    root_ = add_node(root_state_);
    SearchNode &r = nodes_[static_cast<std::size_t>(root_)];
    r.g = 0.0;
    if (memo(root_state_).subgoal) {
        r.status = NodeStatus::Goal;
        return;
    }
    register_novelty(root_);
    push_back_open(root_);
}

std::optional<std::size_t> LazyIw::best_parent(NodeId n) const {
    const SearchNode &node = nodes_[static_cast<std::size_t>(n)];
    std::optional<std::size_t> best;
    double best_g = kInf;
    for (std::size_t i = 0; i < node.parents.size(); ++i) {
        const SearchEdge &e = node.parents[i];
        double g = nodes_[static_cast<std::size_t>(e.parent)].g + e.cost;
        if (g < best_g) {
            best_g = g;
            best = i;
        }
    }
    return best;
}

std::optional<std::vector<PlanStep>> LazyIw::run() {
    for (;;) {
        if (restart_)
            rebuild();
        if (root_ >= 0 && nodes_[static_cast<std::size_t>(root_)].status == NodeStatus::Goal)
            return std::vector<PlanStep>{};
        if (open_.empty())
            break;
        NodeId n = open_.front();
        StateId state = nodes_[static_cast<std::size_t>(n)].state;
        Memo &cached = memo(state);
        if (!cached.successors && max_expansions_ && counters_.expanded >= max_expansions_)
            return std::nullopt;
        open_.pop_front();
        SearchNode &node = nodes_[static_cast<std::size_t>(n)];
        node.in_open = false;
        if (node.status != NodeStatus::Open)
            continue;
        node.status = NodeStatus::Closed;
        if (!cached.successors) {
            cached.successors = space_.successors(state);
            ++counters_.expanded;
        }

        const std::vector<Successor> successors = *cached.successors;
        for (const Successor &succ : successors) {
            if (restart_)
                break;
            if (succ.target == state)
                continue;
            if (auto existing = node_of(succ.target)) {
                if (auto plan = merge(n, succ, *existing))
                    return plan;
                continue;
            }
            NodeId m = add_node(succ.target);
            SearchNode &child = nodes_[static_cast<std::size_t>(m)];
            SearchNode &parent = nodes_[static_cast<std::size_t>(n)];
            child.parents.push_back({n, succ.action, succ.cost, succ.confirmed});
            parent.children.push_back(m);
            child.g = parent.g + succ.cost;
            bool goal = memo(succ.target).subgoal;
            if (!std::isfinite(child.g)) {
                // parent lost its root connection while being expanded
                child.status = NodeStatus::Orphan;
                child.prev_status = goal ? NodeStatus::Goal : NodeStatus::Open;
                continue;
            }
            if (goal) {
                child.status = NodeStatus::Goal;
                if (auto plan = get_plan(m))
                    return plan;
                continue;
            }
            bool novel = register_novelty(m);
            nodes_[static_cast<std::size_t>(m)].status = novel ? NodeStatus::Open : NodeStatus::Pruned;
            if (novel)
                push_back_open(m);
        }
    }
    exhausted_ = true;
    return std::nullopt;
}

std::optional<std::vector<PlanStep>> LazyIw::merge(NodeId n, const Successor &succ, NodeId m) {
    SearchNode &node = nodes_[static_cast<std::size_t>(m)];
    for (const SearchEdge &e : node.parents)
        if (e.parent == n && e.action == succ.action)
            return std::nullopt;
    bool was_orphan = node.status == NodeStatus::Orphan;
    auto before = best_parent(m);
    std::optional<std::pair<NodeId, ActionId>> old_best;
    if (before)
        old_best = std::make_pair(node.parents[*before].parent, node.parents[*before].action);

    node.parents.push_back({n, succ.action, succ.cost, succ.confirmed});
    auto &kids = nodes_[static_cast<std::size_t>(n)].children;
    if (std::find(kids.begin(), kids.end(), m) == kids.end())
        kids.push_back(m);
    double cand = nodes_[static_cast<std::size_t>(n)].g + succ.cost;
    if (cand < nodes_[static_cast<std::size_t>(m)].g) {
        nodes_[static_cast<std::size_t>(m)].g = cand;
        propagate_decrease(m);
    }

    const SearchNode &after = nodes_[static_cast<std::size_t>(m)];
    auto now = best_parent(m);
    bool changed = now && (!old_best || *old_best != std::make_pair(after.parents[*now].parent,
                                                                    after.parents[*now].action));
    std::optional<NodeId> goal =
        after.status == NodeStatus::Goal ? std::optional<NodeId>(m) : after.connected_to_goal;
    if (goal && (changed || was_orphan) && std::isfinite(nodes_[static_cast<std::size_t>(*goal)].g))
        return get_plan(*goal);
    return std::nullopt;
}

void LazyIw::propagate_decrease(NodeId from) {
    MinQueue queue;
    queue.push({nodes_[static_cast<std::size_t>(from)].g, from});
    std::vector<NodeId> revived;
    if (nodes_[static_cast<std::size_t>(from)].status == NodeStatus::Orphan)
        revived.push_back(from);
    while (!queue.empty()) {
        auto [g, v] = queue.top();
        queue.pop();
        if (g > nodes_[static_cast<std::size_t>(v)].g)
            continue;
        for (NodeId c : nodes_[static_cast<std::size_t>(v)].children) {
            SearchNode &child = nodes_[static_cast<std::size_t>(c)];
            if (c == root_)
                continue;
            for (const SearchEdge &e : child.parents) {
                if (e.parent != v || g + e.cost >= child.g)
                    continue;
                if (child.status == NodeStatus::Orphan && !std::isfinite(child.g))
                    revived.push_back(c);
                child.g = g + e.cost;
                queue.push({child.g, c});
            }
        }
    }
    std::sort(revived.begin(), revived.end());
    revived.erase(std::unique(revived.begin(), revived.end()), revived.end());
    reconnect(revived);
}

void LazyIw::reconnect(const std::vector<NodeId> &revived) {
    for (NodeId v : revived) {
        SearchNode &node = nodes_[static_cast<std::size_t>(v)];
        node.status = node.prev_status;
        if (node.status == NodeStatus::Goal)
            continue;
        bool novel = register_novelty(v);
        if (node.status == NodeStatus::Open || node.status == NodeStatus::Pruned) {
            node.status = novel ? NodeStatus::Open : NodeStatus::Pruned;
            if (novel && !node.in_open)
                push_back_open(v);
        }
    }
}

void LazyIw::orphan(const std::vector<NodeId> &lost) {
    for (NodeId v : lost) {
        SearchNode &node = nodes_[static_cast<std::size_t>(v)];
        node.prev_status = node.status;
        node.status = NodeStatus::Orphan;
    }
    std::vector<NodeId> recovered;
    auto eligible = [this](NodeId b) { return nodes_[static_cast<std::size_t>(b)].status != NodeStatus::Orphan; };
    for (NodeId v : lost) {
        if (nodes_[static_cast<std::size_t>(v)].prev_status == NodeStatus::Goal)
            continue;
        for (NodeId p : table_.retract(v, nodes_[static_cast<std::size_t>(v)].tuples, eligible)) {
            SearchNode &promoted = nodes_[static_cast<std::size_t>(p)];
            if (promoted.status == NodeStatus::Pruned) {
                promoted.status = NodeStatus::Open;
                recovered.push_back(p);
            }
        }
    }
    std::sort(recovered.begin(), recovered.end());
    recovered.erase(std::unique(recovered.begin(), recovered.end()), recovered.end());
    counters_.recovered += recovered.size();
    for (auto it = recovered.rbegin(); it != recovered.rend(); ++it) {
        nodes_[static_cast<std::size_t>(*it)].in_open = true;
        open_.push_front(*it);
    }
}

void LazyIw::forget_edge(StateId parent, ActionId action, StateId child) {
    auto &list = memo(parent).successors;
    if (list)
        std::erase_if(*list, [&](const Successor &s) { return s.action == action && s.target == child; });
    restart_ = true;
}

void LazyIw::invalidate_edge(NodeId child, std::size_t parent_index) {
    SearchNode &node = nodes_[static_cast<std::size_t>(child)];
    SearchEdge edge = node.parents.at(parent_index);
    if (repair_ == RepairMode::Replay) {
        ++counters_.failed_edges;
        forget_edge(nodes_[static_cast<std::size_t>(edge.parent)].state, edge.action, node.state);
        return;
    }
    node.parents.erase(node.parents.begin() + static_cast<long>(parent_index));
    ++counters_.failed_edges;
    bool still_linked = std::any_of(node.parents.begin(), node.parents.end(),
                                    [&](const SearchEdge &e) { return e.parent == edge.parent; });
    if (!still_linked)
        std::erase(nodes_[static_cast<std::size_t>(edge.parent)].children, child);
    if (child == root_)
        return;

    // every descendant may have routed through the removed edge
    std::vector<char> affected(nodes_.size(), 0);
    std::vector<NodeId> order, stack{child};
    affected[static_cast<std::size_t>(child)] = 1;
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        order.push_back(v);
        for (NodeId c : nodes_[static_cast<std::size_t>(v)].children)
            if (c != root_ && !affected[static_cast<std::size_t>(c)]) {
                affected[static_cast<std::size_t>(c)] = 1;
                stack.push_back(c);
            }
    }
    for (NodeId v : order)
        nodes_[static_cast<std::size_t>(v)].g = kInf;
    MinQueue queue;
    for (NodeId v : order) {
        SearchNode &n = nodes_[static_cast<std::size_t>(v)];
        for (const SearchEdge &e : n.parents) {
            if (affected[static_cast<std::size_t>(e.parent)])
                continue;
            double g = nodes_[static_cast<std::size_t>(e.parent)].g + e.cost;
            if (g < n.g)
                n.g = g;
        }
        if (std::isfinite(n.g))
            queue.push({n.g, v});
    }
    while (!queue.empty()) {
        auto [g, v] = queue.top();
        queue.pop();
        if (g > nodes_[static_cast<std::size_t>(v)].g)
            continue;
        for (NodeId c : nodes_[static_cast<std::size_t>(v)].children) {
            if (!affected[static_cast<std::size_t>(c)])
                continue;
            SearchNode &cn = nodes_[static_cast<std::size_t>(c)];
            for (const SearchEdge &e : cn.parents)
                if (e.parent == v && g + e.cost < cn.g) {
                    cn.g = g + e.cost;
                    queue.push({cn.g, c});
                }
        }
    }
    std::vector<NodeId> lost;
    for (NodeId v : order) {
        const SearchNode &n = nodes_[static_cast<std::size_t>(v)];
        if (!std::isfinite(n.g) && n.status != NodeStatus::Orphan)
            lost.push_back(v);
    }
    std::sort(lost.begin(), lost.end());
    orphan(lost);
}

bool LazyIw::invalidate_edge(StateId parent, ActionId action, StateId child) {
    if (repair_ == RepairMode::Replay) {
        auto it = memo_.find(parent);
        if (it == memo_.end() || !it->second.successors)
            return false;
        const auto &list = *it->second.successors;
        if (std::none_of(list.begin(), list.end(),
                         [&](const Successor &s) { return s.action == action && s.target == child; }))
            return false;
        ++counters_.failed_edges;
        forget_edge(parent, action, child);
        return true;
    }
    auto c = node_of(child);
    auto p = node_of(parent);
    if (!c || !p)
        return false;
    const auto &parents = nodes_[static_cast<std::size_t>(*c)].parents;
    for (std::size_t i = 0; i < parents.size(); ++i)
        if (parents[i].parent == *p && parents[i].action == action) {
            invalidate_edge(*c, i);
            return true;
        }
    return false;
}

std::optional<std::vector<PlanStep>> LazyIw::get_plan(NodeId goal) {
    ++counters_.plan_attempts;
    for (;;) {
        if (!std::isfinite(nodes_[static_cast<std::size_t>(goal)].g))
            return std::nullopt;
        std::vector<std::pair<NodeId, std::size_t>> path;
        for (NodeId v = goal; v != root_;) {
            auto idx = best_parent(v);
            if (!idx || path.size() > nodes_.size())
                throw std::logic_error("broken parent chain while extracting a plan");
            path.emplace_back(v, *idx);
            v = nodes_[static_cast<std::size_t>(v)].parents[*idx].parent;
        }
        bool failed = false;
        for (auto [c, idx] : path) {
            const SearchEdge &e = nodes_[static_cast<std::size_t>(c)].parents[idx];
            if (!e.confirmed) {
                Successor s{e.action, nodes_[static_cast<std::size_t>(c)].state, e.cost, false};
                StateId from = nodes_[static_cast<std::size_t>(e.parent)].state;
                if (!space_.confirm(from, s)) {
                    invalidate_edge(c, idx);
                    if (restart_)
                        return std::nullopt;
                    failed = true;
                    break;
                }
                nodes_[static_cast<std::size_t>(c)].parents[idx].confirmed = true;
                if (auto &list = memo(from).successors)
                    for (Successor &m : *list)
                        if (m.action == s.action && m.target == s.target)
                            m.confirmed = true;
            }
            nodes_[static_cast<std::size_t>(c)].connected_to_goal = goal;
        }
        if (failed)
            continue;
        nodes_[static_cast<std::size_t>(root_)].connected_to_goal = goal;
        std::vector<PlanStep> steps;
        for (auto it = path.rbegin(); it != path.rend(); ++it) {
            const SearchEdge &e = nodes_[static_cast<std::size_t>(it->first)].parents[it->second];
            steps.push_back({nodes_[static_cast<std::size_t>(e.parent)].state, e.action,
                             nodes_[static_cast<std::size_t>(it->first)].state});
        }
        return steps;
    }
}

std::optional<std::string> LazyIw::audit() const {
    for (std::size_t v = 0; v < nodes_.size(); ++v) {
        const SearchNode &n = nodes_[v];
        if (static_cast<NodeId>(v) == root_) {
            if (n.g != 0.0)
                return "root g is not zero";
            continue;
        }
        double expected = kInf;
        for (const SearchEdge &e : n.parents)
            expected = std::min(expected, nodes_[static_cast<std::size_t>(e.parent)].g + e.cost);
        bool same = (!std::isfinite(expected) && !std::isfinite(n.g)) ||
                    std::abs(expected - n.g) <= 1e-9 * std::max(1.0, std::abs(expected));
        if (!same)
            return "node " + std::to_string(v) + " has inconsistent g";
        if ((n.status == NodeStatus::Orphan) != !std::isfinite(n.g))
            return "node " + std::to_string(v) + " orphan status disagrees with g";
    }
    for (const auto &[t, e] : table_.entries()) {
        if (e.main < 0)
            return "novelty entry without support";
        if (nodes_[static_cast<std::size_t>(e.main)].status == NodeStatus::Orphan)
            return "novelty entry supported by an orphan";
    }
    return std::nullopt;
}

SearchResult lazy_iw(SearchSpace &space, StateId start, int k_max, std::uint64_t max_expansions,
                     RepairMode repair) {
    SearchResult res;
    for (int k = 1; k <= std::max(1, k_max); ++k) {
        LazyIw engine(space, k, max_expansions, repair);
        engine.start(start);
        res.plan = engine.run();
        res.width = k;
        const SearchCounters &c = engine.counters();
        res.counters.expanded += c.expanded;
        res.counters.generated += c.generated;
        res.counters.failed_edges += c.failed_edges;
        res.counters.recovered += c.recovered;
        res.counters.plan_attempts += c.plan_attempts;
        res.counters.replays += c.replays;
        if (res.plan || !engine.exhausted())
            break;
    }
    return res;
}

}  // namespace sketchplan
