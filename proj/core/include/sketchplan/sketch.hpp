#pragma once

#include "sketchplan/sampler.hpp"
#include "sketchplan/world.hpp"

#include <array>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace sketchplan {

struct FeatureVec {
    bool H = false;
    bool I = false;
    int m = 0;
    int u = 0;
    int v = 0;
    friend bool operator==(const FeatureVec &, const FeatureVec &) = default;
};

std::string to_string(const FeatureVec &f);

enum class Feature { H = 0, I = 1, M = 2, U = 3, V = 4 };
inline constexpr int kFeatureCount = 5;

/// Effect on one feature. `Same` means the feature is not mentioned.
enum class Effect { Same, SetTrue, SetFalse, Unknown, Decrease, NonIncrease, Increase };

struct SketchRule {
    std::string id;
    /// Per feature: booleans require true/false; counters require >0 (true) or =0 (false).
    std::array<std::optional<bool>, kFeatureCount> cond{};
    std::array<Effect, kFeatureCount> eff{Effect::Same, Effect::Same, Effect::Same, Effect::Same, Effect::Same};

    friend bool operator==(const SketchRule &, const SketchRule &) = default;
};

struct Sketch {
    std::vector<SketchRule> rules;
};

class SketchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NoApplicableRule : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// r1..r4 for pick-and-place rearrangement.
Sketch default_sketch();

/// One rule per line: `[id:] {cond,...} -> {eff,...}`; `#` starts a comment.
/// Throws SketchError on syntax errors or overlapping rule conditions.
Sketch parse_sketch(const std::string &text);
std::string rule_to_string(const SketchRule &rule);

bool conditions_hold(const SketchRule &rule, const FeatureVec &f);
bool pair_satisfies(const SketchRule &rule, const FeatureVec &f, const FeatureVec &f2);
/// Whether checking `rule` on a pair needs the I value of the second state.
bool rule_needs_I(const SketchRule &rule);
const SketchRule &active_rule(const Sketch &sketch, const FeatureVec &f);

/// Whether two rules can both apply to some feature valuation.
bool conditions_overlap(const SketchRule &a, const SketchRule &b);

struct TerminationResult {
    bool terminating = false;
    std::vector<std::string> residual;  // rule ids left when not terminating
};

TerminationResult check_termination(const Sketch &sketch);

/// Pick/place blocking counts of a misplaced object.
struct BlockingCounts {
    int alpha = 0;
    int beta = 0;
    friend bool operator==(const BlockingCounts &, const BlockingCounts &) = default;
};

/// Corridor-geometry feature evaluation for one task and sample set.
class FeatureEvaluator {
public:
    FeatureEvaluator(const Task &task, const SampleSet &samples);

    /// `with_I` false leaves I unset (false); see rule_needs_I.
    FeatureVec features(const WorldState &state, bool with_I = true) const;
    BlockingCounts blocking_counts(const WorldState &state, ObjectId object) const;
    std::set<ObjectId> misplaced(const WorldState &state) const;
    bool held_goal_blocked(const WorldState &state) const;
    bool compute_I(const WorldState &state) const;
    /// Sampled placements that satisfy the object's goal in `state`.
    std::vector<PlacementRef> goal_placements(const WorldState &state, ObjectId object) const;
    /// Misplaced standing objects whose alpha would grow if `object` stood at `p`.
    int newly_blocked(const WorldState &state, ObjectId object, const Pose2 &p) const;

    /// Value used for alpha when an object has no pick/place option at all.
    int no_option() const { return static_cast<int>(task_.objects.size()) + 1; }

private:
    struct Option {
        int grasp;
        Vec2 start, end;  // approach corridor
        double half_width;
        std::uint64_t mask;  // objects in the corridor or on the target
    };
    struct Pair {
        int pick, place;
        std::uint64_t mask;
    };
    struct Options {
        std::vector<Option> picks, places;
        std::vector<Pair> pairs;
        int alpha = 0;
        std::vector<int> alpha_without;  // alpha with one object ignored, by id
    };
    // per-state cache
    struct Context {
        const WorldState &state;
        std::set<ObjectId> misplaced;
        std::map<ObjectId, Options> options;
    };

    Context context(const WorldState &state) const;
    const Options &options(Context &ctx, ObjectId object) const;
    std::vector<Option> pick_options(const WorldState &state, ObjectId object) const;
    std::vector<Option> place_options(const WorldState &state, ObjectId object, const Pose2 &p) const;
    bool blocks(const Context &ctx, const Options &o, ObjectId ignore, Vec2 p, double radius) const;
    int newly_blocked(Context &ctx, ObjectId object, const Pose2 &p) const;
    BlockingCounts blocking_counts(Context &ctx, ObjectId object) const;
    void mvu(Context &ctx, FeatureVec &f) const;

    const Task &task_;
    const SampleSet &samples_;
};

FeatureVec compute_features(const WorldState &state, const SampleSet &samples, const Task &task);

}  // namespace sketchplan
