#pragma once

#include "sketchplan/world.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sketchplan {

enum class Clutter { Low, Medium, High };

std::string to_string(Clutter c);
Clutter clutter_from_string(const std::string &s);

struct BenchSpec {
    Family family = Family::Sorting;
    int n_tables = 2;
    int n_goal_objects = -1;      // -1: family default
    int n_obstacle_objects = -1;  // -1: family default
    Clutter clutter = Clutter::Low;
    std::uint64_t seed = 0;
    std::string word = "TAMP";
};

class GenerationFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kObjectRadius = 0.035;
inline constexpr int kWordBlocks = 11;

/// Minimum center spacing for a clutter level.
double clutter_spacing(Clutter c);

/// N blue blocks to the left table, N green to the right, obstacles in red.
Task gen_sorting(const BenchSpec &spec);
/// Three greens boxed in by red blocks, goal regions boxed in by blue ones;
/// reds and blues must end where they started.
Task gen_nonmonotonic(const BenchSpec &spec);
/// Letter blocks to be lined up into `spec.word` on one small table.
Task gen_words(const BenchSpec &spec);
Task generate(const BenchSpec &spec);

}  // namespace sketchplan
