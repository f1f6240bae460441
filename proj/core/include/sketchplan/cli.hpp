#pragma once

#include "sketchplan/bench.hpp"
#include "sketchplan/planner.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace sketchplan {

inline constexpr const char *kSuiteFormat = "sketchplan-suite/1";

enum ExitCode { kExitOk = 0, kExitInputError = 1, kExitPlannerFailure = 2, kExitViolation = 3 };

struct RunConfig {
    PlannerConfig planner;
    std::filesystem::path plan_out;
    std::filesystem::path metrics_out;
    std::filesystem::path report;
};

/// Reads `key = value` lines; `#` starts a comment.
std::map<std::string, std::string> read_config_file(const std::filesystem::path &path);
/// Applies known keys and throws InputError on unknown keys or bad values.
void apply_config(RunConfig &config, const std::map<std::string, std::string> &kv);

struct SuiteEntry {
    std::string label;
    BenchSpec spec;
    int repetitions = 10;
};

std::vector<SuiteEntry> suite_from_json(const std::string &text);
std::string suite_to_json(const std::vector<SuiteEntry> &suite);
/// `family-tables-goals-obstacles-clutter`, or the word for Words.
std::string spec_label(const BenchSpec &spec);

/// Bench CSV: one row per run, then one aggregate row per suite entry.
std::string bench_csv_header();

int cmd_gen(const BenchSpec &spec, const std::filesystem::path &out, std::ostream &err);
int cmd_solve(const std::filesystem::path &task_file, const RunConfig &config, std::ostream &out, std::ostream &err);
int cmd_replay(const std::filesystem::path &task_file, const std::filesystem::path &plan_file, std::ostream &out,
               std::ostream &err);
int cmd_render(const std::filesystem::path &task_file, const std::filesystem::path &plan_file,
               const std::filesystem::path &svg_file, std::ostream &err);
/// SKETCHPLAN_THREADS if set, else the CPUs this process may run on.
unsigned worker_count();

/// Runs on worker_count() threads.
int cmd_bench(const std::filesystem::path &suite_file, const RunConfig &config, std::ostream &out, std::ostream &err);

}  // namespace sketchplan
