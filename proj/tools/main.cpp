#include "sketchplan/cli.hpp"
#include "sketchplan/task_io.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace sketchplan;

namespace {

// Config file first, then whichever flags were given on top.
struct PlannerFlags {
    std::string config_file;
    std::map<std::string, std::string> overrides;

    void add(CLI::App *cmd) {
        cmd->add_option("-c,--config", config_file, "key = value config file");
        for (const char *key : {"planner", "seed", "bases", "placements_per_table", "grasps", "escalation_max",
                                "ik_budget", "iter_cap", "max_expansions", "repair", "report"}) {
            std::string name = std::string("--") + key;
            cmd->add_option_function<std::string>(
                name, [this, k = std::string(key)](const std::string &v) { overrides[k] = v; });
        }
    }

    RunConfig resolve() const {
        RunConfig rc;
        if (!config_file.empty())
            apply_config(rc, read_config_file(config_file));
        apply_config(rc, overrides);
        return rc;
    }
};

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Sketch-guided task and motion planning on tabletop problems"};
    app.require_subcommand(1);

    BenchSpec spec;
    std::string family = "sorting", clutter = "low", gen_out;
    auto *gen = app.add_subcommand("gen", "Generate a benchmark task");
    gen->add_option("--family", family, "sorting | nonmonotonic | words");
    gen->add_option("--tables", spec.n_tables);
    gen->add_option("--goals", spec.n_goal_objects);
    gen->add_option("--obstacles", spec.n_obstacle_objects);
    gen->add_option("--clutter", clutter, "low | medium | high");
    gen->add_option("--seed", spec.seed);
    gen->add_option("--word", spec.word);
    gen->add_option("-o,--out", gen_out, "task JSON")->required();

    std::string task_file, plan_file, metrics_file, svg_file, suite_file;
    PlannerFlags solve_flags, bench_flags;
    auto *solve = app.add_subcommand("solve", "Plan for a task");
    solve->add_option("task", task_file)->required()->check(CLI::ExistingFile);
    solve->add_option("--plan", plan_file, "plan JSON output");
    solve->add_option("--metrics", metrics_file, "metrics JSON output");
    solve_flags.add(solve);

    auto *replay = app.add_subcommand("replay", "Check a plan against its task");
    replay->add_option("task", task_file)->required()->check(CLI::ExistingFile);
    replay->add_option("plan", plan_file)->required()->check(CLI::ExistingFile);

    auto *render = app.add_subcommand("render", "Draw plan keyframes as SVG");
    render->add_option("task", task_file)->required()->check(CLI::ExistingFile);
    render->add_option("plan", plan_file)->required()->check(CLI::ExistingFile);
    render->add_option("-o,--out", svg_file)->required();

    auto *bench = app.add_subcommand("bench", "Run a suite and write a CSV report");
    bench->add_option("suite", suite_file)->required()->check(CLI::ExistingFile);
    bench_flags.add(bench);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitInputError;
    }

    try {
        if (*gen) {
            spec.family = family_from_string(family);
            spec.clutter = clutter_from_string(clutter);
            return cmd_gen(spec, gen_out, std::cerr);
        }
        if (*solve) {
            RunConfig rc = solve_flags.resolve();
            if (!plan_file.empty())
                rc.plan_out = plan_file;
            if (!metrics_file.empty())
                rc.metrics_out = metrics_file;
            return cmd_solve(task_file, rc, std::cout, std::cerr);
        }
        if (*replay)
            return cmd_replay(task_file, plan_file, std::cout, std::cerr);
        if (*render)
            return cmd_render(task_file, plan_file, svg_file, std::cerr);
        if (*bench)
            return cmd_bench(suite_file, bench_flags.resolve(), std::cout, std::cerr);
    } catch (const std::exception &e) {
        std::cerr << e.what() << '\n';
        return kExitInputError;
    }
    return kExitInputError;
}
