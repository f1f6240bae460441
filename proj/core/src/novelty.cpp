#include "sketchplan/novelty.hpp"

#include <algorithm>

namespace sketchplan {

namespace {

void combine(const std::vector<Atom> &atoms, std::size_t from, int left, Tuple &cur, std::vector<Tuple> &out) {
    if (left == 0) {
        out.push_back(cur);
        return;
    }
    for (std::size_t i = from; i + static_cast<std::size_t>(left) <= atoms.size(); ++i) {
        cur.push_back(atoms[i]);
        combine(atoms, i + 1, left - 1, cur, out);
        cur.pop_back();
    }
}

}  // namespace

std::vector<Tuple> make_tuples(std::vector<Atom> atoms, int k) {
    std::sort(atoms.begin(), atoms.end());
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
    std::vector<Tuple> out;
    Tuple cur;
    for (int size = 1; size <= k && size <= static_cast<int>(atoms.size()); ++size)
        combine(atoms, 0, size, cur, out);
    return out;
}

bool NoveltyTable::register_node(NodeId node, const std::vector<Tuple> &tuples) {
    bool novel = false;
    for (const Tuple &t : tuples) {
        auto [it, inserted] = entries_.try_emplace(t);
        if (inserted) {
            it->second.main = node;
            novel = true;
        } else if (it->second.main != node) {
            // node ids grow with discovery, so sorted order is discovery order
            auto &b = it->second.backups;
            auto pos = std::lower_bound(b.begin(), b.end(), node);
            if (pos == b.end() || *pos != node)
                b.insert(pos, node);
        }
    }
    return novel;
}

}  // namespace sketchplan
