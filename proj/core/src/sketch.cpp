#include "sketchplan/sketch.hpp"

#include "sketchplan/exec.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <sstream>

namespace sketchplan {

std::string to_string(const FeatureVec &f) {
    std::ostringstream out;
    out << (f.H ? "H" : "!H") << ' ' << (f.I ? "I" : "!I") << " m=" << f.m << " u=" << f.u << " v=" << f.v;
    return out.str();
}

namespace {

constexpr const char *kNames[kFeatureCount] = {"H", "I", "m", "u", "v"};

bool is_counter(int k) { return k >= static_cast<int>(Feature::M); }

int value(const FeatureVec &f, int k) {
    switch (k) {
    case 0: return f.H;
    case 1: return f.I;
    case 2: return f.m;
    case 3: return f.u;
    default: return f.v;
    }
}

std::string trim(const std::string &s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

int feature_index(const std::string &name) {
    for (int k = 0; k < kFeatureCount; ++k)
        if (name == kNames[k])
            return k;
    return -1;
}

std::vector<std::string> split_set(const std::string &text, std::size_t line_no) {
    std::string t = trim(text);
    if (t.size() < 2 || t.front() != '{' || t.back() != '}')
        throw SketchError("line " + std::to_string(line_no) + ": expected {...}, got '" + t + "'");
    std::vector<std::string> out;
    std::stringstream ss(t.substr(1, t.size() - 2));
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!trim(tok).empty())
            out.push_back(trim(tok));
    return out;
}

SketchRule make_rule(std::string id, std::initializer_list<std::string> cond, std::initializer_list<std::string> eff);

void parse_condition(SketchRule &r, const std::string &tok, std::size_t line_no) {
    int k = -1;
    bool val = true;
    if (tok.size() == 3 && (tok.substr(1) == "=0" || tok.substr(1) == ">0")) {
        k = feature_index(tok.substr(0, 1));
        val = tok[1] == '>';
        if (k >= 0 && !is_counter(k))
            k = -1;
    } else {
        std::string name = tok[0] == '!' ? tok.substr(1) : tok;
        k = feature_index(name);
        val = tok[0] != '!';
        if (k >= 0 && is_counter(k))
            k = -1;
    }
    if (k < 0)
        throw SketchError("line " + std::to_string(line_no) + ": unknown condition '" + tok + "'");
    if (r.cond[static_cast<std::size_t>(k)])
        throw SketchError("line " + std::to_string(line_no) + ": feature " + kNames[k] + " repeated in conditions");
    r.cond[static_cast<std::size_t>(k)] = val;
}

void parse_effect(SketchRule &r, const std::string &tok, std::size_t line_no) {
    int k = -1;
    Effect e = Effect::Same;
    if (tok[0] == '!') {
        k = feature_index(tok.substr(1));
        e = Effect::SetFalse;
        if (k >= 0 && is_counter(k))
            k = -1;
    } else if (feature_index(tok) >= 0) {
        k = feature_index(tok);
        e = Effect::SetTrue;
        if (is_counter(k))
            k = -1;
    } else {
        k = feature_index(tok.substr(0, 1));
        std::string op = tok.substr(1);
        if (op == "?")
            e = Effect::Unknown;
        else if (k >= 0 && is_counter(k) && op == "-")
            e = Effect::Decrease;
        else if (k >= 0 && is_counter(k) && op == "<=")
            e = Effect::NonIncrease;
        else if (k >= 0 && is_counter(k) && op == "+")
            e = Effect::Increase;
        else
            k = -1;
    }
    if (k < 0)
        throw SketchError("line " + std::to_string(line_no) + ": unknown effect '" + tok + "'");
    if (r.eff[static_cast<std::size_t>(k)] != Effect::Same)
        throw SketchError("line " + std::to_string(line_no) + ": feature " + kNames[k] + " repeated in effects");
    r.eff[static_cast<std::size_t>(k)] = e;
}

SketchRule make_rule(std::string id, std::initializer_list<std::string> cond, std::initializer_list<std::string> eff) {
    SketchRule r;
    r.id = std::move(id);
    for (const auto &c : cond)
        parse_condition(r, c, 0);
    for (const auto &e : eff)
        parse_effect(r, e, 0);
    return r;
}

void check_exclusive(const Sketch &s) {
    for (std::size_t a = 0; a < s.rules.size(); ++a)
        for (std::size_t b = a + 1; b < s.rules.size(); ++b)
            if (conditions_overlap(s.rules[a], s.rules[b]))
                throw SketchError("rules " + s.rules[a].id + " and " + s.rules[b].id + " have overlapping conditions");
}

}  // namespace

Sketch default_sketch() {
    return Sketch{{
        make_rule("r1", {"!H", "m>0", "u=0"}, {"H", "I", "m-", "u?", "v<="}),
        make_rule("r2", {"!H", "m>0", "u>0"}, {"H", "I?", "m?", "u?", "v-"}),
        make_rule("r3", {"H", "!I"}, {"!H", "I?", "m?"}),
        make_rule("r4", {"H", "I"}, {"!H", "I?"}),
    }};
}

Sketch parse_sketch(const std::string &text) {
    Sketch sketch;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty())
            continue;
        SketchRule rule;
        rule.id = "r" + std::to_string(sketch.rules.size() + 1);
        auto brace = line.find('{');
        auto colon = line.find(':');
        if (colon != std::string::npos && colon < brace) {
            rule.id = trim(line.substr(0, colon));
            line = line.substr(colon + 1);
        }
        auto arrow = line.find("->");
        if (arrow == std::string::npos)
            throw SketchError("line " + std::to_string(line_no) + ": missing '->'");
        for (const auto &tok : split_set(line.substr(0, arrow), line_no))
            parse_condition(rule, tok, line_no);
        for (const auto &tok : split_set(line.substr(arrow + 2), line_no))
            parse_effect(rule, tok, line_no);
        sketch.rules.push_back(std::move(rule));
    }
    if (sketch.rules.empty())
        throw SketchError("sketch has no rules");
    check_exclusive(sketch);
    return sketch;
}

std::string rule_to_string(const SketchRule &rule) {
    std::vector<std::string> cond, eff;
    for (int k = 0; k < kFeatureCount; ++k) {
        const auto &c = rule.cond[static_cast<std::size_t>(k)];
        if (c)
            cond.push_back(is_counter(k) ? std::string(kNames[k]) + (*c ? ">0" : "=0")
                                         : (*c ? "" : "!") + std::string(kNames[k]));
        std::string n = kNames[k];
        switch (rule.eff[static_cast<std::size_t>(k)]) {
        case Effect::Same: break;
        case Effect::SetTrue: eff.push_back(n); break;
        case Effect::SetFalse: eff.push_back("!" + n); break;
        case Effect::Unknown: eff.push_back(n + "?"); break;
        case Effect::Decrease: eff.push_back(n + "-"); break;
        case Effect::NonIncrease: eff.push_back(n + "<="); break;
        case Effect::Increase: eff.push_back(n + "+"); break;
        }
    }
    auto join = [](const std::vector<std::string> &v) {
        std::string s = "{";
        for (std::size_t i = 0; i < v.size(); ++i)
            s += (i ? ", " : "") + v[i];
        return s + "}";
    };
    return rule.id + ": " + join(cond) + " -> " + join(eff);
}

bool conditions_hold(const SketchRule &rule, const FeatureVec &f) {
    for (int k = 0; k < kFeatureCount; ++k) {
        const auto &c = rule.cond[static_cast<std::size_t>(k)];
        if (c && (value(f, k) > 0) != *c)
            return false;
    }
    return true;
}

bool pair_satisfies(const SketchRule &rule, const FeatureVec &f, const FeatureVec &f2) {
    if (!conditions_hold(rule, f))
        return false;
    for (int k = 0; k < kFeatureCount; ++k) {
        int a = value(f, k), b = value(f2, k);
        bool ok = true;
        switch (rule.eff[static_cast<std::size_t>(k)]) {
        case Effect::Same: ok = a == b; break;
        case Effect::SetTrue: ok = b != 0; break;
        case Effect::SetFalse: ok = b == 0; break;
        case Effect::Unknown: break;
        case Effect::Decrease: ok = b < a; break;
        case Effect::NonIncrease: ok = b <= a; break;
        case Effect::Increase: ok = b > a; break;
        }
        if (!ok)
            return false;
    }
    return true;
}

bool rule_needs_I(const SketchRule &rule) {
    return rule.eff[static_cast<std::size_t>(Feature::I)] != Effect::Unknown;
}

const SketchRule &active_rule(const Sketch &sketch, const FeatureVec &f) {
    for (const SketchRule &r : sketch.rules)
        if (conditions_hold(r, f))
            return r;
    throw NoApplicableRule("no sketch rule applies to " + to_string(f));
}

bool conditions_overlap(const SketchRule &a, const SketchRule &b) {
    for (std::size_t k = 0; k < kFeatureCount; ++k)
        if (a.cond[k] && b.cond[k] && *a.cond[k] != *b.cond[k])
            return false;
    return true;
}

namespace {

// Abstract values a feature may take after applying a rule: bit 0 = false/zero, bit 1 = true/positive.
unsigned post_values(const SketchRule &r, std::size_t k) {
    unsigned pre = r.cond[k] ? (*r.cond[k] ? 2u : 1u) : 3u;
    switch (r.eff[k]) {
    case Effect::Same: return pre;
    case Effect::SetTrue: return 2u;
    case Effect::SetFalse: return 1u;
    case Effect::Unknown: return 3u;
    case Effect::Decrease: return (pre & 2u) ? 3u : 0u;
    case Effect::NonIncrease: return pre == 1u ? 1u : 3u;
    case Effect::Increase: return 2u;
    }
    return 3u;
}

bool can_follow(const SketchRule &a, const SketchRule &b) {
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
        unsigned post = post_values(a, k);
        if (post == 0u)
            return false;
        if (b.cond[k] && !(post & (*b.cond[k] ? 2u : 1u)))
            return false;
    }
    return true;
}

}  // namespace

TerminationResult check_termination(const Sketch &sketch) {
    const std::size_t n = sketch.rules.size();
    std::vector<bool> alive(n, true);
    for (;;) {
        // reach[a][b]: b reachable from a in one or more steps among live rules
        std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                reach[a][b] = alive[a] && alive[b] && can_follow(sketch.rules[a], sketch.rules[b]);
        for (std::size_t m = 0; m < n; ++m)
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = 0; b < n; ++b)
                    if (reach[a][m] && reach[m][b])
                        reach[a][b] = true;

        std::vector<std::size_t> removed;
        for (std::size_t r = 0; r < n; ++r) {
            if (!alive[r])
                continue;
            if (!reach[r][r]) {
                removed.push_back(r);
                continue;
            }
            for (std::size_t k = static_cast<std::size_t>(Feature::M); k < kFeatureCount; ++k) {
                if (sketch.rules[r].eff[k] != Effect::Decrease)
                    continue;
                bool restored = false;
                for (std::size_t s = 0; s < n; ++s) {
                    if (!alive[s] || !reach[r][s] || !reach[s][r])
                        continue;
                    Effect e = sketch.rules[s].eff[k];
                    restored = restored || e == Effect::Unknown || e == Effect::Increase;
                }
                if (!restored) {
                    removed.push_back(r);
                    break;
                }
            }
        }
        if (removed.empty())
            break;
        for (std::size_t r : removed)
            alive[r] = false;
    }
    TerminationResult res;
    for (std::size_t r = 0; r < n; ++r)
        if (alive[r])
            res.residual.push_back(sketch.rules[r].id);
    res.terminating = res.residual.empty();
    return res;
}

FeatureEvaluator::FeatureEvaluator(const Task &task, const SampleSet &samples) : task_(task), samples_(samples) {
    if (task.objects.size() > 64)
        throw std::invalid_argument("feature evaluation supports at most 64 objects");
}

std::vector<PlacementRef> FeatureEvaluator::goal_placements(const WorldState &state, ObjectId object) const {
    const MovableObject &obj = task_.object(object);
    std::vector<PlacementRef> out;
    auto each = [&](auto &&pred) {
        for (std::size_t t = 0; t < samples_.placements.size(); ++t)
            for (std::size_t i = 0; i < samples_.placements[t].size(); ++i)
                if (pred(static_cast<int>(t), samples_.placements[t][i]))
                    out.push_back({static_cast<int>(t), static_cast<int>(i)});
    };
    if (!std::holds_alternative<RelativeWord>(obj.goal)) {
        each([&](int t, const Pose2 &p) {
            return task_.table(t).rect.contains(p.position()) && pose_satisfies_goal(task_, obj, p);
        });
        return out;
    }
    WordPrefix prefix = words_valid_prefix_detail(state, task_);
    const std::size_t done = prefix.blocks.size();
    const double tol = word_tolerance(task_);
    std::vector<int> slots;
    for (std::size_t s = done; s < task_.word.size(); ++s)
        if (obj.label.size() == 1 && obj.label[0] == task_.word[s])
            slots.push_back(static_cast<int>(s));
    each([&](int t, const Pose2 &p) {
        for (int slot : slots) {
            if (done > 0) {
                if (distance(p.position(), word_slot_position(task_, prefix.anchor, slot)) <= tol)
                    return true;
            } else if (samples_.word_anchor) {
                if (distance(p.position(), word_slot_position(task_, samples_.word_anchor->position(), slot)) <= tol)
                    return true;
            } else {
                Vec2 anchor = word_slot_position(task_, p.position(), -slot);
                if (word_fits(task_, task_.table(t), anchor))
                    return true;
            }
        }
        return false;
    });
    return out;
}

std::vector<FeatureEvaluator::Option> FeatureEvaluator::pick_options(const WorldState &state, ObjectId object) const {
    std::vector<Option> out;
    Vec2 target = state.object_poses.at(object).position();
    double radius = task_.object(object).radius;
    for (const Pose2 &b : samples_.bases) {
        Vec2 base = b.position();
        double d = distance(base, target);
        if (d < task_.robot.reach_min || d > task_.robot.reach_max || base_hits_object(task_, state, base))
            continue;
        std::optional<std::uint64_t> mask;
        for (std::size_t g = 0; g < samples_.grasps.size(); ++g) {
            if (!grasp_compatible(samples_.grasps[g], base, target))
                continue;
            if (!mask)
                mask = corridor_mask(task_, state, base, target, radius, object);
            out.push_back({static_cast<int>(g), gripper_start(task_, base, target), target,
                           radius + kCorridorClearance, *mask});
        }
    }
    return out;
}

std::vector<FeatureEvaluator::Option> FeatureEvaluator::place_options(const WorldState &state, ObjectId object,
                                                                      const Pose2 &p) const {
    std::vector<Option> out;
    double radius = task_.object(object).radius;
    auto table = task_.table_at(p.position());
    if (!table || !task_.table(*table).rect.contains(p.position(), radius - kOverlapEpsilon))
        return out;
    Vec2 target = p.position();
    // whatever stands on the placement blocks it like a corridor obstacle
    std::uint64_t occupants = 0;
    for (const auto &[id, q] : state.object_poses)
        if (id != object && distance(q.position(), target) < radius + task_.object(id).radius - kOverlapEpsilon)
            occupants |= std::uint64_t{1} << id;
    for (const Pose2 &b : samples_.bases) {
        Vec2 base = b.position();
        double d = distance(base, target);
        if (d < task_.robot.reach_min || d > task_.robot.reach_max || base_hits_object(task_, state, base, object))
            continue;
        std::optional<std::uint64_t> mask;
        for (std::size_t g = 0; g < samples_.grasps.size(); ++g) {
            if (!grasp_compatible(samples_.grasps[g], base, target))
                continue;
            if (!mask)
                mask = corridor_mask(task_, state, base, target, radius, object) | occupants;
            out.push_back({static_cast<int>(g), gripper_start(task_, base, target), target,
                           radius + kCorridorClearance, *mask});
        }
    }
    return out;
}

bool FeatureEvaluator::held_goal_blocked(const WorldState &state) const {
    if (!state.held)
        return false;
    ObjectId i = state.held->object;
    for (PlacementRef ref : goal_placements(state, i))
        for (const Option &o : place_options(state, i, samples_.placement(ref)))
            if (samples_.grasps[static_cast<std::size_t>(o.grasp)] == state.held->grasp && o.mask == 0)
                return false;
    return true;
}

std::set<ObjectId> FeatureEvaluator::misplaced(const WorldState &state) const {
    return misplaced_set(state, task_, [this](const WorldState &s, ObjectId) { return held_goal_blocked(s); });
}

FeatureEvaluator::Context FeatureEvaluator::context(const WorldState &state) const {
    return Context{state, misplaced(state), {}};
}

const FeatureEvaluator::Options &FeatureEvaluator::options(Context &ctx, ObjectId object) const {
    auto it = ctx.options.find(object);
    if (it != ctx.options.end())
        return it->second;
    const WorldState &state = ctx.state;
    Options o;
    bool held = state.held && state.held->object == object;
    if (!held)
        o.picks = pick_options(state, object);
    for (PlacementRef ref : goal_placements(state, object)) {
        auto more = place_options(state, object, samples_.placement(ref));
        o.places.insert(o.places.end(), more.begin(), more.end());
    }
    const int none = no_option();
    o.alpha = none;
    if (held) {
        for (const Option &pl : o.places)
            if (samples_.grasps[static_cast<std::size_t>(pl.grasp)] == state.held->grasp)
                o.alpha = std::min(o.alpha, std::popcount(pl.mask));
    } else {
        for (std::size_t a = 0; a < o.picks.size(); ++a)
            for (std::size_t b = 0; b < o.places.size(); ++b)
                if (o.picks[a].grasp == o.places[b].grasp) {
                    std::uint64_t mask = o.picks[a].mask | o.places[b].mask;
                    o.pairs.push_back({static_cast<int>(a), static_cast<int>(b), mask});
                    o.alpha = std::min(o.alpha, std::popcount(mask));
                }
    }
    // ignoring k can only help pairs that contain k
    o.alpha_without.assign(task_.objects.size(), o.alpha);
    for (const Pair &pr : o.pairs) {
        int c = std::popcount(pr.mask) - 1;
        for (std::uint64_t m = pr.mask; m; m &= m - 1) {
            int &slot = o.alpha_without[static_cast<std::size_t>(std::countr_zero(m))];
            slot = std::min(slot, c);
        }
    }
    // only near-optimal pairs can be optimal once one object is ignored
    std::erase_if(o.pairs, [&](const Pair &pr) { return std::popcount(pr.mask) > o.alpha + 1; });
    return ctx.options.emplace(object, std::move(o)).first->second;
}

bool FeatureEvaluator::blocks(const Context &, const Options &o, ObjectId ignore, Vec2 p, double radius) const {
    const std::uint64_t keep = ~(std::uint64_t{1} << ignore);
    const int best = o.alpha_without[static_cast<std::size_t>(ignore)];
    if (best >= no_option())
        return false;
    // alpha grows iff the disc hits every optimal pair
    for (const Pair &pr : o.pairs) {
        if (std::popcount(pr.mask & keep) != best)
            continue;
        const Option &pk = o.picks[static_cast<std::size_t>(pr.pick)];
        const Option &pl = o.places[static_cast<std::size_t>(pr.place)];
        bool hit = disc_in_corridor(pk.start, pk.end, pk.half_width, p, radius) ||
                   disc_in_corridor(pl.start, pl.end, pl.half_width, p, radius) ||
                   distance(pl.end, p) < radius + pl.half_width - kCorridorClearance - kOverlapEpsilon;
        if (!hit)
            return false;
    }
    return true;
}

int FeatureEvaluator::newly_blocked(Context &ctx, ObjectId object, const Pose2 &p) const {
    const double radius = task_.object(object).radius;
    int count = 0;
    for (ObjectId j : ctx.misplaced) {
        if (j == object || !ctx.state.object_poses.contains(j))
            continue;
        if (blocks(ctx, options(ctx, j), object, p.position(), radius))
            ++count;
    }
    return count;
}

int FeatureEvaluator::newly_blocked(const WorldState &state, ObjectId object, const Pose2 &p) const {
    Context ctx = context(state);
    return newly_blocked(ctx, object, p);
}

BlockingCounts FeatureEvaluator::blocking_counts(const WorldState &state, ObjectId object) const {
    Context ctx = context(state);
    return blocking_counts(ctx, object);
}

BlockingCounts FeatureEvaluator::blocking_counts(Context &ctx, ObjectId object) const {
    BlockingCounts res;
    res.alpha = options(ctx, object).alpha;
    std::optional<int> beta;
    // occupied placements count too: the disc then covers the occupant
    for (PlacementRef ref : goal_placements(ctx.state, object)) {
        const Pose2 &p = samples_.placement(ref);
        int count = newly_blocked(ctx, object, p);
        beta = std::min(beta.value_or(count), count);
        if (*beta == 0)
            break;
    }
    res.beta = beta.value_or(0);
    return res;
}

void FeatureEvaluator::mvu(Context &ctx, FeatureVec &f) const {
    f.m = static_cast<int>(ctx.misplaced.size());
    f.u = 0;
    f.v = 0;
    std::optional<int> u;
    for (ObjectId i : ctx.misplaced) {
        BlockingCounts c = blocking_counts(ctx, i);
        f.v += c.alpha;
        u = std::min(u.value_or(c.alpha + c.beta), c.alpha + c.beta);
    }
    f.u = u.value_or(0);
}

bool FeatureEvaluator::compute_I(const WorldState &state) const {
    if (!state.held)
        return false;
    ObjectId i = state.held->object;
    Context ctx = context(state);
    FeatureVec now;
    mvu(ctx, now);
    for (PlacementRef ref : goal_placements(state, i)) {
        const Pose2 &p = samples_.placement(ref);
        bool clear = false;
        for (const Option &o : place_options(state, i, p))
            if (samples_.grasps[static_cast<std::size_t>(o.grasp)] == state.held->grasp && o.mask == 0) {
                clear = true;
                break;
            }
        if (!clear || newly_blocked(ctx, i, p) > 0)
            continue;
        WorldState placed = state;
        placed.held.reset();
        placed.object_poses[i] = p;
        Context after_ctx = context(placed);
        FeatureVec after;
        mvu(after_ctx, after);
        if (after.m == now.m && after.u == now.u && after.v == now.v)
            return true;
    }
    return false;
}

FeatureVec FeatureEvaluator::features(const WorldState &state, bool with_I) const {
    FeatureVec f;
    f.H = state.held.has_value();
    Context ctx = context(state);
    mvu(ctx, f);
    f.I = with_I && f.H && compute_I(state);
    return f;
}

FeatureVec compute_features(const WorldState &state, const SampleSet &samples, const Task &task) {
    return FeatureEvaluator(task, samples).features(state);
}

}  // namespace sketchplan
