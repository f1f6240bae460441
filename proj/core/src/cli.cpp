#include "sketchplan/cli.hpp"

#include "sketchplan/plan_io.hpp"
#include "sketchplan/task_io.hpp"

#include "json_util.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include <sched.h>

namespace sketchplan {

using detail::json;

namespace {

std::string trim(const std::string &s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

int to_int(const std::string &key, const std::string &v) {
    try {
        std::size_t used = 0;
        int x = std::stoi(v, &used);
        if (used != v.size())
            throw std::invalid_argument(v);
        return x;
    } catch (const std::exception &) {
        throw InputError("config: '" + key + "' expects an integer, got '" + v + "'");
    }
}

int positive(const std::string &key, const std::string &v) {
    int x = to_int(key, v);
    if (x <= 0)
        throw InputError("config: '" + key + "' must be positive");
    return x;
}

bool to_bool(const std::string &key, const std::string &v) {
    if (v == "1" || v == "true" || v == "yes")
        return true;
    if (v == "0" || v == "false" || v == "no")
        return false;
    throw InputError("config: '" + key + "' expects a boolean, got '" + v + "'");
}

void append_line(const std::filesystem::path &path, const std::string &header, const std::string &row) {
    bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    std::ofstream f(path, std::ios::app);
    if (!f)
        throw InputError("cannot open '" + path.string() + "' for appending");
    if (fresh)
        f << header << '\n';
    f << row << '\n';
}

RunResult timed_solve(const Task &task, const PlannerConfig &config) {
    auto t0 = std::chrono::steady_clock::now();
    RunResult r = solve(task, config);
    r.metrics.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace

std::map<std::string, std::string> read_config_file(const std::filesystem::path &path) {
    std::istringstream in(read_text_file(path));
    std::map<std::string, std::string> kv;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty())
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError(path.string() + ":" + std::to_string(n) + ": expected key = value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

void apply_config(RunConfig &config, const std::map<std::string, std::string> &kv) {
    PlannerConfig &p = config.planner;
    for (const auto &[key, v] : kv) {
        if (key == "planner") {
            try {
                p.planner = planner_from_string(v);
            } catch (const std::invalid_argument &e) {
                throw InputError(std::string("config: ") + e.what());
            }
        } else if (key == "seed") {
            p.seed = static_cast<std::uint64_t>(to_int(key, v));
        } else if (key == "bases") {
            p.density.n_bases = positive(key, v);
        } else if (key == "placements_per_table") {
            p.density.n_placements_per_table = positive(key, v);
        } else if (key == "grasps") {
            p.density.n_grasps = positive(key, v);
        } else if (key == "sops") {
            p.density.n_sops = positive(key, v);
        } else if (key == "escalation_max") {
            p.escalation_max = std::max(0, to_int(key, v));
        } else if (key == "uncapped") {
            p.uncapped = to_bool(key, v);
        } else if (key == "ik_budget") {
            p.exec.ik_budget = positive(key, v);
        } else if (key == "iter_cap") {
            p.exec.iter_cap = positive(key, v);
        } else if (key == "max_expansions") {
            p.max_expansions = static_cast<std::uint64_t>(positive(key, v));
        } else if (key == "max_subproblems") {
            p.max_subproblems = positive(key, v);
        } else if (key == "repair") {
            if (v == "replay")
                p.repair = RepairMode::Replay;
            else if (v == "local")
                p.repair = RepairMode::Local;
            else
                throw InputError("config: repair must be 'replay' or 'local'");
        } else if (key == "plan") {
            config.plan_out = v;
        } else if (key == "metrics") {
            config.metrics_out = v;
        } else if (key == "report") {
            config.report = v;
        } else {
            throw InputError("config: unknown key '" + key + "'");
        }
    }
}

std::string spec_label(const BenchSpec &s) {
    if (s.family == Family::Words)
        return "words-" + s.word;
    std::ostringstream os;
    os << to_string(s.family) << '-' << s.n_tables << '-' << s.n_goal_objects << '-' << s.n_obstacle_objects << '-'
       << to_string(s.clutter);
    return os.str();
}

std::vector<SuiteEntry> suite_from_json(const std::string &text) {
    json j = detail::parse_document(text, "suite");
    std::vector<SuiteEntry> out;
    try {
        if (j.value("format", std::string(kSuiteFormat)) != kSuiteFormat)
            throw InputError("suite: unsupported format");
        for (const json &e : j.at("entries")) {
            SuiteEntry s;
            s.spec.family = family_from_string(e.at("family").get<std::string>());
            s.spec.n_tables = e.value("tables", s.spec.n_tables);
            s.spec.n_goal_objects = e.value("goals", -1);
            s.spec.n_obstacle_objects = e.value("obstacles", -1);
            s.spec.clutter = clutter_from_string(e.value("clutter", std::string("low")));
            s.spec.seed = e.value("seed", std::uint64_t{0});
            s.spec.word = e.value("word", s.spec.word);
            s.repetitions = e.value("repetitions", 10);
            if (s.repetitions <= 0)
                throw InputError("suite: repetitions must be positive");
            s.label = e.value("label", spec_label(s.spec));
            out.push_back(std::move(s));
        }
    } catch (const json::exception &e) {
        throw InputError(std::string("suite: ") + e.what());
    } catch (const std::invalid_argument &e) {
        throw InputError(std::string("suite: ") + e.what());
    }
    return out;
}

std::string suite_to_json(const std::vector<SuiteEntry> &suite) {
    json entries = json::array();
    for (const SuiteEntry &s : suite)
        entries.push_back({{"label", s.label},
                           {"family", to_string(s.spec.family)},
                           {"tables", s.spec.n_tables},
                           {"goals", s.spec.n_goal_objects},
                           {"obstacles", s.spec.n_obstacle_objects},
                           {"clutter", to_string(s.spec.clutter)},
                           {"seed", s.spec.seed},
                           {"word", s.spec.word},
                           {"repetitions", s.repetitions}});
    return json{{"format", kSuiteFormat}, {"entries", std::move(entries)}}.dump(2) + "\n";
}

std::string bench_csv_header() {
    return "kind,label,seed,planner,success,success_ratio,expanded_nodes,subplans,plan_actions,planning_units,"
           "stage3_calls,seconds";
}

int cmd_gen(const BenchSpec &spec, const std::filesystem::path &out, std::ostream &err) {
    try {
        save_task(generate(spec), out);
        return kExitOk;
    } catch (const GenerationFailed &e) {
        err << "gen: " << e.what() << '\n';
    } catch (const std::exception &e) {
        err << "gen: " << e.what() << '\n';
    }
    return kExitInputError;
}

int cmd_solve(const std::filesystem::path &task_file, const RunConfig &config, std::ostream &out, std::ostream &err) {
    Task task;
    try {
        task = load_task(task_file);
    } catch (const std::exception &e) {
        err << e.what() << '\n';
        return kExitInputError;
    }
    RunResult r = timed_solve(task, config.planner);
    try {
        if (r.plan && !config.plan_out.empty())
            write_text_file(config.plan_out, plan_to_json(*r.plan, config.planner.planner, config.planner.seed));
        if (!config.metrics_out.empty())
            write_text_file(config.metrics_out, metrics_to_json(r.metrics));
        if (!config.report.empty())
            append_line(config.report, metrics_csv_header(),
                        metrics_csv_row(task_file.stem().string(), config.planner.seed, config.planner.planner,
                                        r.metrics));
    } catch (const std::exception &e) {
        err << e.what() << '\n';
        return kExitInputError;
    }
    if (!r.metrics.success) {
        err << "planner failed: " << r.metrics.failure << '\n';
        return kExitPlannerFailure;
    }
    out << "solved: " << r.metrics.plan_actions << " actions, " << r.metrics.subplans << " subplans, "
        << r.metrics.expanded_nodes << " expanded\n";
    return kExitOk;
}

int cmd_replay(const std::filesystem::path &task_file, const std::filesystem::path &plan_file, std::ostream &out,
               std::ostream &err) {
    Task task;
    PlanDocument plan;
    try {
        task = load_task(task_file);
        plan = plan_from_json(read_text_file(plan_file));
    } catch (const std::exception &e) {
        err << e.what() << '\n';
        return kExitInputError;
    }
    ReplayReport rep = replay(task, plan);
    if (!rep.ok) {
        out << "violation at " << rep.index << ": " << rep.message << '\n';
        return kExitViolation;
    }
    out << "ok: " << plan.actions.size() << " actions\n";
    return kExitOk;
}

int cmd_render(const std::filesystem::path &task_file, const std::filesystem::path &plan_file,
               const std::filesystem::path &svg_file, std::ostream &err) {
    try {
        Task task = load_task(task_file);
        PlanDocument plan = plan_from_json(read_text_file(plan_file));
        write_text_file(svg_file, render_svg(task, rollout(task, plan.actions), plan.actions));
        return kExitOk;
    } catch (const std::exception &e) {
        err << e.what() << '\n';
        return kExitInputError;
    }
}

unsigned worker_count() {
    if (const char *env = std::getenv("SKETCHPLAN_THREADS"))
        if (int n = std::atoi(env); n > 0)
            return static_cast<unsigned>(n);
    cpu_set_t set;
    if (sched_getaffinity(0, sizeof set, &set) == 0)
        return std::max(1, CPU_COUNT(&set));
    return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_bench(const std::filesystem::path &suite_file, const RunConfig &config, std::ostream &out, std::ostream &err) {
    std::vector<SuiteEntry> suite;
    try {
        suite = suite_from_json(read_text_file(suite_file));
    } catch (const std::exception &e) {
        err << e.what() << '\n';
        return kExitInputError;
    }
    struct Job {
        std::size_t entry;
        std::uint64_t seed;
        RunMetrics metrics;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < suite.size(); ++i)
        for (int k = 0; k < suite[i].repetitions; ++k)
            jobs.push_back({i, suite[i].spec.seed + static_cast<std::uint64_t>(k), {}});

    unsigned workers = std::min<unsigned>(worker_count(), static_cast<unsigned>(std::max<std::size_t>(1, jobs.size())));

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
            Job &job = jobs[j];
            BenchSpec spec = suite[job.entry].spec;
            spec.seed = job.seed;
            try {
                Task task = generate(spec);
                PlannerConfig pc = config.planner;
                pc.seed = job.seed;
                job.metrics = timed_solve(task, pc).metrics;
            } catch (const std::exception &e) {
                job.metrics.success = false;
                job.metrics.failure = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w)
        pool.emplace_back(work);
    work();
    for (std::thread &t : pool)
        t.join();

    const std::string planner = to_string(config.planner.planner);
    auto fmt = [](double x) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", x);
        return std::string(buf);
    };
    std::ostringstream csv;
    csv << bench_csv_header() << '\n';
    for (const Job &job : jobs) {
        const RunMetrics &m = job.metrics;
        csv << "run," << suite[job.entry].label << ',' << job.seed << ',' << planner << ',' << (m.success ? 1 : 0)
            << ',' << (m.success ? 1 : 0) << ',' << m.expanded_nodes << ',' << m.subplans << ',' << m.plan_actions
            << ',' << m.planning_units() << ',' << m.stats.stages[2].calls << ',' << fmt(m.seconds) << '\n';
        if (!m.success)
            err << suite[job.entry].label << " seed " << job.seed << ": " << m.failure << '\n';
    }
    for (std::size_t i = 0; i < suite.size(); ++i) {
        double n = 0, ok = 0, expanded = 0, subplans = 0, actions = 0, units = 0, stage3 = 0, secs = 0;
        for (const Job &job : jobs) {
            if (job.entry != i)
                continue;
            const RunMetrics &m = job.metrics;
            n += 1;
            ok += m.success ? 1 : 0;
            expanded += static_cast<double>(m.expanded_nodes);
            subplans += m.subplans;
            actions += m.plan_actions;
            units += static_cast<double>(m.planning_units());
            stage3 += static_cast<double>(m.stats.stages[2].calls);
            secs += m.seconds;
        }
        csv << "aggregate," << suite[i].label << ",," << planner << ',' << ok << ',' << fmt(ok / n) << ','
            << fmt(expanded / n) << ',' << fmt(subplans / n) << ',' << fmt(actions / n) << ',' << fmt(units / n)
            << ',' << fmt(stage3 / n) << ',' << fmt(secs / n) << '\n';
    }
    try {
        if (config.report.empty())
            out << csv.str();
        else
            write_text_file(config.report, csv.str());
    } catch (const std::exception &e) {
        err << e.what() << '\n';
        return kExitInputError;
    }
    return kExitOk;
}

}  // namespace sketchplan
