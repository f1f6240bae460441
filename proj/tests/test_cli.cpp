#include "scenes.hpp"

#include "sketchplan/cli.hpp"
#include "sketchplan/plan_io.hpp"
#include "sketchplan/task_io.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <unistd.h>

using namespace sketchplan;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int n = 0;
        path = fs::temp_directory_path() / ("sketchplan_cli_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path operator/(const std::string &f) const { return path / f; }
};

std::vector<std::string> lines(const std::string &text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);)
        if (!l.empty())
            out.push_back(l);
    return out;
}

std::vector<std::string> split(const std::string &row) {
    std::vector<std::string> out;
    std::stringstream ss(row);
    for (std::string c; std::getline(ss, c, ',');)
        out.push_back(c);
    if (!row.empty() && row.back() == ',')
        out.emplace_back();
    return out;
}

std::size_t count(const std::string &hay, const std::string &needle) {
    std::size_t n = 0;
    for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1))
        ++n;
    return n;
}

Task sorting_task(std::uint64_t seed) {
    BenchSpec spec;
    spec.n_tables = 3;
    spec.n_goal_objects = 2;
    spec.n_obstacle_objects = 0;
    spec.seed = seed;
    return generate(spec);
}

struct Solved {
    TempDir dir;
    Task task;
    fs::path task_file, plan_file;
    explicit Solved(std::uint64_t seed) : task(sorting_task(seed)) {
        task_file = dir / "task.json";
        plan_file = dir / "plan.json";
        save_task(task, task_file);
        RunConfig rc;
        rc.planner.seed = seed;
        rc.plan_out = plan_file;
        std::ostringstream out, err;
        REQUIRE(cmd_solve(task_file, rc, out, err) == kExitOk);
    }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("solve on a goal-start task") {
    TempDir dir;
    Task t = scenes::two_tables();
    scenes::add(t, "blue", {-1.1, 0}, scenes::region_of(t, 0));
    save_task(t, dir / "t.json");
    RunConfig rc;
    rc.plan_out = dir / "p.json";
    rc.metrics_out = dir / "m.json";
    rc.report = dir / "r.csv";
    std::ostringstream out, err;
    CHECK(cmd_solve(dir / "t.json", rc, out, err) == kExitOk);
    PlanDocument p = plan_from_json(read_text_file(dir / "p.json"));
    CHECK(p.actions.empty());
    CHECK(p.subplans.empty());
    auto rows = lines(read_text_file(dir / "r.csv"));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == metrics_csv_header());
    CHECK(split(rows[1])[3] == "1");
    CHECK(read_text_file(dir / "m.json").find("\"seconds\"") == std::string::npos);
}

TEST_CASE("invalid task JSON exits 1 without a metrics row") {
    TempDir dir;
    write_text_file(dir / "bad.json", "{\n  \"format\": \n");
    RunConfig rc;
    rc.report = dir / "r.csv";
    rc.metrics_out = dir / "m.json";
    std::ostringstream out, err;
    CHECK(cmd_solve(dir / "bad.json", rc, out, err) == kExitInputError);
    CHECK(err.str().find("line") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "r.csv"));
    CHECK_FALSE(fs::exists(dir / "m.json"));
}

TEST_CASE("replay accepts a fresh plan") {
    Solved s(3);
    std::ostringstream out, err;
    CHECK(cmd_replay(s.task_file, s.plan_file, out, err) == kExitOk);
}

TEST_CASE("replay catches a placement moved into collision") {
    Solved s(4);
    PlanDocument p = plan_from_json(read_text_file(s.plan_file));
    auto states = rollout(s.task, p.actions);
    int idx = -1;
    for (std::size_t i = 0; i < p.actions.size(); ++i) {
        auto *pl = std::get_if<PlaceMotion>(&p.actions[i].action);
        if (!pl)
            continue;
        // drop it onto another standing object
        for (const auto &[id, pose] : states[i].object_poses) {
            pl->placement = Pose2(pose.x + 0.01, pose.y, 0);
            idx = static_cast<int>(i);
            break;
        }
        if (idx >= 0)
            break;
    }
    REQUIRE(idx >= 0);
    ReplayReport rep = replay(s.task, p);
    CHECK_FALSE(rep.ok);
    CHECK(rep.index == idx);
    PlanDocument broken = p;
    write_text_file(s.dir / "broken.json", plan_to_json(Plan{broken.actions, {}, broken.subplans, 0.0},
                                                         broken.planner, broken.seed));
    std::ostringstream out, err;
    CHECK(cmd_replay(s.task_file, s.dir / "broken.json", out, err) == kExitViolation);
}

TEST_CASE("empty plan on a non-goal task") {
    Task t = sorting_task(1);
    PlanDocument empty;
    ReplayReport rep = replay(t, empty);
    CHECK_FALSE(rep.ok);
    CHECK(rep.message == "terminal state not goal");
}

TEST_CASE("render keyframes") {
    Solved s(5);
    PlanDocument p = plan_from_json(read_text_file(s.plan_file));
    std::ostringstream err;
    REQUIRE(cmd_render(s.task_file, s.plan_file, s.dir / "p.svg", err) == kExitOk);
    std::string svg = read_text_file(s.dir / "p.svg");
    CHECK(count(svg, "class=\"keyframe\"") == p.actions.size() + 1);
    CHECK(count(svg, "class=\"object\"") == (p.actions.size() + 1) * s.task.objects.size());
    std::string one = render_svg(s.task, {s.task.start}, {});
    CHECK(count(one, "class=\"keyframe\"") == 1);
}

TEST_CASE("bench rows and aggregates") {
    TempDir dir;
    SuiteEntry e;
    e.spec.n_tables = 3;
    e.spec.n_goal_objects = 2;
    e.spec.n_obstacle_objects = 0;
    e.repetitions = 10;
    e.label = "s3";
    write_text_file(dir / "suite.json", suite_to_json({e}));
    RunConfig rc;
    rc.report = dir / "bench.csv";
    ::setenv("SKETCHPLAN_THREADS", "3", 1);
    std::ostringstream out, err;
    REQUIRE(cmd_bench(dir / "suite.json", rc, out, err) == kExitOk);
    auto rows = lines(read_text_file(dir / "bench.csv"));
    REQUIRE(rows.size() == 12);
    CHECK(rows[0] == bench_csv_header());
    auto header = split(rows[0]);
    auto col = [&](const std::string &name) {
        return static_cast<std::size_t>(std::ranges::find(header, name) - header.begin());
    };
    double sum = 0;
    for (int i = 1; i <= 10; ++i) {
        auto c = split(rows[static_cast<std::size_t>(i)]);
        CHECK(c[0] == "run");
        double ratio = std::stod(c[col("success_ratio")]);
        CHECK(ratio >= 0.0);
        CHECK(ratio <= 1.0);
        sum += std::stod(c[col("expanded_nodes")]);
    }
    auto agg = split(rows[11]);
    CHECK(agg[0] == "aggregate");
    CHECK(std::stod(agg[col("expanded_nodes")]) == doctest::Approx(sum / 10).epsilon(1e-3));
    double ratio = std::stod(agg[col("success_ratio")]);
    CHECK(ratio >= 0.0);
    CHECK(ratio <= 1.0);
}

TEST_CASE("lazy and full agree on sorting with medium clutter") {
    BenchSpec spec;
    spec.n_tables = 2;
    spec.clutter = Clutter::Medium;
    spec.seed = 6;
    Task t = generate(spec);
    PlannerConfig c;
    c.seed = 6;
    RunResult lazy = solve(t, c);
    c.planner = PlannerKind::SiwrFull;
    RunResult full = solve(t, c);
    REQUIRE(lazy.metrics.success);
    REQUIRE(full.metrics.success);
    CHECK(lazy.metrics.subplans == full.metrics.subplans);
    CHECK(lazy.metrics.stats.stages[2].calls < full.metrics.stats.stages[2].calls);
}

TEST_CASE("config file with flag overrides") {
    TempDir dir;
    write_text_file(dir / "c.cfg", "# density\nbases = 20\nplanner = siwr-full\nseed=4\n");
    RunConfig rc;
    apply_config(rc, read_config_file(dir / "c.cfg"));
    apply_config(rc, {{"seed", "9"}});
    CHECK(rc.planner.density.n_bases == 20);
    CHECK(rc.planner.planner == PlannerKind::SiwrFull);
    CHECK(rc.planner.seed == 9);
    CHECK_THROWS_AS(apply_config(rc, {{"colour", "blue"}}), InputError);
    CHECK_THROWS_AS(apply_config(rc, {{"bases", "0"}}), InputError);
    write_text_file(dir / "bad.cfg", "bases 20\n");
    CHECK_THROWS_AS(read_config_file(dir / "bad.cfg"), InputError);
}

TEST_CASE("plan JSON round trip") {
    Solved s(6);
    std::string text = read_text_file(s.plan_file);
    PlanDocument p = plan_from_json(text);
    CHECK(text.find("\"format\": \"sketchplan-plan/1\"") != std::string::npos);
    CHECK(p.seed == 6);
    Plan again{p.actions, {}, p.subplans, p.total_cost};
    CHECK(plan_to_json(again, p.planner, p.seed) == text);
}

}
