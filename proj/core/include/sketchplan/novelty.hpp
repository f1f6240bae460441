#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace sketchplan {

/// Encoded atom: RobotAt(base) or ObjectAt(object, placement | held).
using Atom = std::uint64_t;
using Tuple = std::vector<Atom>;  // sorted, size <= k
using NodeId = int;

inline constexpr std::uint32_t kHeldPlacement = 0xffffffffu;

constexpr Atom robot_at(int base) { return (std::uint64_t{1} << 63) | static_cast<std::uint32_t>(base); }
constexpr Atom object_at(int object, std::uint32_t placement) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(object)) << 32) | placement;
}

/// All tuples of 1..k distinct atoms, each sorted; atoms are deduplicated first.
std::vector<Tuple> make_tuples(std::vector<Atom> atoms, int k);

struct NoveltyEntry {
    NodeId main = -1;
    std::vector<NodeId> backups;  // discovery order
};

class NoveltyTable {
public:
    /// Registers `node` for every tuple: main support of absent tuples, backup
    /// of present ones. Returns whether any tuple was absent.
    bool register_node(NodeId node, const std::vector<Tuple> &tuples);

    /// Drops `node` from every entry it appears in. Entries it mainly supported
    /// get the first backup accepted by `eligible` as new main, or are erased.
    /// Returns the promoted nodes.
    template <class Eligible>
    std::vector<NodeId> retract(NodeId node, const std::vector<Tuple> &tuples, Eligible eligible);

    const NoveltyEntry *find(const Tuple &t) const {
        auto it = entries_.find(t);
        return it == entries_.end() ? nullptr : &it->second;
    }
    const std::map<Tuple, NoveltyEntry> &entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    void clear() { entries_.clear(); }

private:
    std::map<Tuple, NoveltyEntry> entries_;
};

template <class Eligible>
std::vector<NodeId> NoveltyTable::retract(NodeId node, const std::vector<Tuple> &tuples, Eligible eligible) {
    std::vector<NodeId> promoted;
    for (const Tuple &t : tuples) {
        auto it = entries_.find(t);
        if (it == entries_.end())
            continue;
        NoveltyEntry &e = it->second;
        std::erase(e.backups, node);
        if (e.main != node)
            continue;
        auto b = std::find_if(e.backups.begin(), e.backups.end(), eligible);
        if (b == e.backups.end()) {
            entries_.erase(it);
            continue;
        }
        e.main = *b;
        e.backups.erase(b);
        promoted.push_back(e.main);
    }
    return promoted;
}

}  // namespace sketchplan
