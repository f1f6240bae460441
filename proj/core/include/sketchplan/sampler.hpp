#pragma once

#include "sketchplan/rng.hpp"
#include "sketchplan/world.hpp"

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace sketchplan {

class SamplingExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DensityCapReached : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SamplingDensity {
    int n_bases = 16;
    int n_placements_per_table = 10;
    int n_grasps = 4;
    int n_sops = 1;
    int attempt = 0;
    friend bool operator==(const SamplingDensity &, const SamplingDensity &) = default;
};

inline constexpr int kMaxBases = 64;
inline constexpr int kMaxPlacementsPerTable = 200;
inline constexpr int kMaxGrasps = 16;
inline constexpr int kMaximinBatch = 32;
inline constexpr int kMaximinRetryFactor = 10;
inline constexpr int kRegionSamplesPerRound = 3;
/// Spacing of the table-top grid that base sampling tries to keep in reach.
inline constexpr double kGridStep = 0.3;

/// Next density after a failed subproblem. Throws DensityCapReached once
/// `density.attempt` has reached `max_escalations` (unless `uncapped`).
SamplingDensity escalate(const SamplingDensity &density, int max_escalations = 8, bool uncapped = false);

struct PlacementRef {
    int table = 0;
    int index = 0;
    friend auto operator<=>(const PlacementRef &, const PlacementRef &) = default;
};

struct SampleSet {
    std::vector<Pose2> bases;
    std::vector<std::vector<Pose2>> placements;  // indexed by table id
    std::vector<double> grasps;
    std::vector<std::vector<int>> roadmap;  // adjacency over base indices, sorted
    std::uint64_t seed = 0;
    double d_max = 0.0;
    /// Words: slot 0 of the current prefix, or with no prefix the least occupied sampled layout.
    std::optional<Pose2> word_anchor;

    const Pose2 &placement(PlacementRef ref) const {
        return placements.at(static_cast<std::size_t>(ref.table)).at(static_cast<std::size_t>(ref.index));
    }
    int placement_count() const;
    /// Dense index across tables (table-major).
    int flat_index(PlacementRef ref) const;

    std::optional<int> base_index(const Pose2 &p) const;
    std::optional<PlacementRef> placement_ref(const Pose2 &p) const;
    std::optional<int> grasp_index(double g) const;
    int nearest_base(Vec2 p) const;
};

struct PickAction {
    int base = 0;
    ObjectId object = 0;
    int grasp = 0;
    friend auto operator<=>(const PickAction &, const PickAction &) = default;
};

struct PlaceAction {
    int base = 0;
    ObjectId object = 0;
    PlacementRef placement;
    int sop = 0;
    friend auto operator<=>(const PlaceAction &, const PlaceAction &) = default;
};

struct MoveBaseAction {
    int from = 0;
    int to = 0;
    friend auto operator<=>(const MoveBaseAction &, const MoveBaseAction &) = default;
};

using GroundAction = std::variant<PickAction, PlaceAction, MoveBaseAction>;

ConcreteAction resolve(const SampleSet &samples, const GroundAction &action);

struct Disc {
    Vec2 center;
    double radius = 0.0;
};

/// Candidate batches examined by sample_placements, for inspection in tests.
struct SamplingTrace {
    struct Batch {
        std::vector<Pose2> candidates;
        std::vector<double> scores;
        std::size_t chosen = 0;
    };
    std::vector<Batch> batches;
};

/// Returns `fixed` followed by `k` greedily maximin-sampled poses on `table`
/// (restricted to `domain` when given). Each new pose is the best of a batch of
/// kMaximinBatch collision-free uniform candidates, scored by the minimum
/// distance to all fixed/selected poses and obstacle discs.
std::vector<Pose2> sample_placements(const Table &table, int k, std::vector<Pose2> fixed,
                                     std::span<const Disc> obstacles, double radius, Rng &rng,
                                     const Rect *domain = nullptr, SamplingTrace *trace = nullptr);

/// `k` base poses in the reachable band around the tables, starting with the
/// `anchors` (deduplicated). Greedily covers table edge segments first, then
/// puts `targets` and a grid over each table top within arm reach.
std::vector<Pose2> sample_bases(const Task &task, int k, std::span<const Pose2> anchors, Rng &rng,
                                std::span<const Vec2> targets = {});

/// Edges between bases closer than d_max = 2 * mean nearest-neighbour distance;
/// d_max doubles until the graph is connected. Returns adjacency and d_max.
std::pair<std::vector<std::vector<int>>, double> build_roadmap(std::span<const Pose2> bases);

/// Every grounded action relevant in `state` (no executability check).
std::vector<GroundAction> ground_actions(const WorldState &state, const SampleSet &samples, const Task &task);

/// Evenly spaced approach angles starting at -pi, plus `keep` if given.
std::vector<double> sample_grasps(int n, std::optional<double> keep);

/// Goal poses the sampler must include for the current state: exact-pose
/// goals and, for words, the slots of the current prefix.
std::vector<std::pair<int, Pose2>> required_goal_poses(const WorldState &state, const Task &task);

/// Builds a full SampleSet for a subproblem rooted at `state`. When
/// `reuse_bases` is given its bases are kept (plus the current base).
SampleSet make_samples(const Task &task, const WorldState &state, const SamplingDensity &density,
                       std::uint64_t seed, const std::vector<Pose2> *reuse_bases = nullptr);

}  // namespace sketchplan
