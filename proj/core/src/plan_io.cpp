#include "sketchplan/plan_io.hpp"

#include "json_util.hpp"

#include <cstdio>
#include <sstream>

namespace sketchplan {

using detail::json;

namespace {

json features_to_json(const FeatureVec &f) {
    return {{"H", f.H}, {"I", f.I}, {"m", f.m}, {"u", f.u}, {"v", f.v}};
}

FeatureVec features_from_json(const json &j) {
    return {j.at("H").get<bool>(), j.at("I").get<bool>(), j.at("m").get<int>(), j.at("u").get<int>(),
            j.at("v").get<int>()};
}

json counter_to_json(const StageCounter &c) { return {{"calls", c.calls}, {"passes", c.passes}}; }

}  // namespace

std::string plan_to_json(const Plan &plan, PlannerKind planner, std::uint64_t seed) {
    json actions = json::array();
    for (const MotionPlan &mp : plan.actions) {
        json path = json::array();
        for (const Pose2 &p : mp.base_path)
            path.push_back(detail::pose_to_json(p));
        json a = detail::action_to_json(mp.action);
        a["base_path"] = std::move(path);
        a["cost"] = mp.cost;
        actions.push_back(std::move(a));
    }
    json subplans = json::array();
    for (const SubplanRecord &s : plan.subplans)
        subplans.push_back({{"first_action", s.first_action},
                            {"n_actions", s.n_actions},
                            {"rule", s.rule},
                            {"before", features_to_json(s.before)},
                            {"after", features_to_json(s.after)},
                            {"width", s.width},
                            {"attempts", s.attempts}});
    json doc = {{"format", kPlanFormat},      {"planner", to_string(planner)}, {"seed", seed},
                {"total_cost", plan.total_cost}, {"actions", std::move(actions)}, {"subplans", std::move(subplans)}};
    return doc.dump(2) + "\n";
}

PlanDocument plan_from_json(const std::string &text) {
    json j = detail::parse_document(text, "plan");
    try {
        if (j.at("format").get<std::string>() != kPlanFormat)
            throw InputError("plan: unsupported format '" + j.at("format").get<std::string>() + "'");
        PlanDocument doc;
        doc.seed = j.at("seed").get<std::uint64_t>();
        doc.planner = planner_from_string(j.value("planner", std::string("lazy-siiwr")));
        doc.total_cost = j.value("total_cost", 0.0);
        for (const json &a : j.at("actions")) {
            MotionPlan mp;
            mp.action = detail::action_from_json(a);
            for (const json &p : a.at("base_path"))
                mp.base_path.push_back(detail::pose_from_json(p));
            mp.cost = a.value("cost", 0.0);
            doc.actions.push_back(std::move(mp));
        }
        for (const json &s : j.at("subplans")) {
            SubplanRecord r;
            r.first_action = s.at("first_action").get<std::size_t>();
            r.n_actions = s.at("n_actions").get<std::size_t>();
            r.rule = s.value("rule", std::string());
            r.before = features_from_json(s.at("before"));
            r.after = features_from_json(s.at("after"));
            r.width = s.value("width", 1);
            r.attempts = s.value("attempts", 1);
            doc.subplans.push_back(std::move(r));
        }
        return doc;
    } catch (const json::exception &e) {
        throw InputError(std::string("plan: ") + e.what());
    } catch (const std::invalid_argument &e) {
        throw InputError(std::string("plan: ") + e.what());
    }
}

PlanDocument to_document(const Plan &plan, PlannerKind planner, std::uint64_t seed) {
    PlanDocument doc;
    doc.seed = seed;
    doc.planner = planner;
    doc.actions = plan.actions;
    doc.subplans = plan.subplans;
    doc.total_cost = plan.total_cost;
    return doc;
}

std::string metrics_to_json(const RunMetrics &m) {
    json stages = json::array();
    for (const StageCounter &c : m.stats.stages)
        stages.push_back(counter_to_json(c));
    json doc = {{"format", kMetricsFormat},
                {"success", m.success},
                {"failure", m.failure},
                {"expanded_nodes", m.expanded_nodes},
                {"generated_nodes", m.generated_nodes},
                {"subplans", m.subplans},
                {"plan_actions", m.plan_actions},
                {"plan_cost", m.plan_cost},
                {"planning_units", m.planning_units()},
                {"escalations", m.escalations},
                {"max_width", m.max_width},
                {"failed_edges", m.failed_edges},
                {"replays", m.replays},
                {"stages", std::move(stages)},
                {"navigation", counter_to_json(m.stats.navigation)},
                {"motion_plan_calls", m.stats.motion_plan_calls()},
                {"corridor_tests", m.stats.corridor_tests},
                {"rrt_iterations", m.stats.rrt_iterations}};
    return doc.dump(2) + "\n";
}

std::string metrics_csv_header() {
    return "label,seed,planner,success,planning_units,expanded_nodes,subplans,plan_actions,plan_cost,"
           "stage1_calls,stage1_passes,stage2_calls,stage2_passes,stage3_calls,stage3_passes,"
           "motion_plan_calls,escalations,max_width,seconds";
}

std::string metrics_csv_row(const std::string &label, std::uint64_t seed, PlannerKind planner, const RunMetrics &m) {
    std::ostringstream os;
    os << label << ',' << seed << ',' << to_string(planner) << ',' << (m.success ? 1 : 0) << ','
       << m.planning_units() << ',' << m.expanded_nodes << ',' << m.subplans << ',' << m.plan_actions << ',';
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", m.plan_cost);
    os << buf;
    for (const StageCounter &c : m.stats.stages)
        os << ',' << c.calls << ',' << c.passes;
    std::snprintf(buf, sizeof buf, "%.3f", m.seconds);
    os << ',' << m.stats.motion_plan_calls() << ',' << m.escalations << ',' << m.max_width << ',' << buf;
    return os.str();
}

std::vector<WorldState> rollout(const Task &task, const std::vector<MotionPlan> &actions) {
    std::vector<WorldState> states{task.start};
    for (const MotionPlan &mp : actions)
        states.push_back(apply(task, states.back(), mp.action));
    return states;
}

ReplayReport replay(const Task &task, const PlanDocument &plan, const ExecParams &params) {
    ReplayReport rep;
    rep.states.push_back(task.start);
    std::uint64_t run_seed = exec_seed(plan.seed);
    for (std::size_t i = 0; i < plan.actions.size(); ++i) {
        const WorldState &s = rep.states.back();
        const ConcreteAction &a = plan.actions[i].action;
        auto fail = [&](const std::string &msg) {
            rep.ok = false;
            rep.index = static_cast<int>(i);
            rep.message = "action " + std::to_string(i) + " (" + action_name(a) + "): " + msg;
            return rep;
        };
        PipelineStats stats;
        ValidationResult v;
        try {
            v = validate(task, s, a, ValidationMode::Full, stats, params, run_seed);
        } catch (const InvariantViolation &e) {
            return fail(e.what());
        }
        if (v.verdict != Verdict::Feasible)
            return fail("rejected at stage " + std::to_string(v.failed_stage));
        try {
            rep.states.push_back(apply(task, s, a));
        } catch (const InvariantViolation &e) {
            return fail(e.what());
        }
    }
    if (!is_goal(rep.states.back(), task)) {
        rep.ok = false;
        rep.index = static_cast<int>(plan.actions.size());
        rep.message = "terminal state not goal";
    }
    return rep;
}

namespace {

const char *label_color(const std::string &label) {
    if (label == "blue")
        return "#3b6fd6";
    if (label == "green")
        return "#3aa655";
    if (label == "red")
        return "#d64545";
    return "#b08a3e";
}

}  // namespace

std::string render_svg(const Task &task, const std::vector<WorldState> &states, const std::vector<MotionPlan> &actions) {
    const double scale = 100.0;
    const double w = 2 * task.arena.half.x * scale;
    const double h = 2 * task.arena.half.y * scale;
    const double gap = 20.0;
    auto X = [&](double x) { return (x - task.arena.center.x + task.arena.half.x) * scale; };
    auto Y = [&](double y) { return (task.arena.center.y + task.arena.half.y - y) * scale; };

    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(2);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\""
       << (h + gap) * static_cast<double>(states.size()) << "\">\n";
    for (std::size_t k = 0; k < states.size(); ++k) {
        const WorldState &s = states[k];
        os << "<g class=\"keyframe\" id=\"frame" << k << "\" transform=\"translate(0," << (h + gap) * k << ")\">\n";
        os << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h
           << "\" fill=\"#fafafa\" stroke=\"#999\"/>\n";
        os << "<text x=\"6\" y=\"16\" font-size=\"14\">"
           << (k == 0 ? std::string("start") : std::to_string(k) + ": " + action_name(actions[k - 1].action))
           << "</text>\n";
        for (const Table &t : task.tables)
            os << "<rect x=\"" << X(t.rect.center.x - t.rect.half.x) << "\" y=\"" << Y(t.rect.center.y + t.rect.half.y)
               << "\" width=\"" << 2 * t.rect.half.x * scale << "\" height=\"" << 2 * t.rect.half.y * scale
               << "\" fill=\"#d9c7a7\" stroke=\"#7a6a4f\"/>\n";
        if (k > 0) {
            const auto &path = actions[k - 1].base_path;
            if (path.size() > 1) {
                os << "<polyline class=\"base-path\" fill=\"none\" stroke=\"#555\" stroke-dasharray=\"4 3\" points=\"";
                for (const Pose2 &p : path)
                    os << X(p.x) << ',' << Y(p.y) << ' ';
                os << "\"/>\n";
            }
        }
        for (const MovableObject &o : task.objects) {
            Vec2 c;
            bool held = s.held && s.held->object == o.id;
            if (held)
                c = s.base.position();
            else
                c = s.object_poses.at(o.id).position();
            os << "<circle class=\"object\" cx=\"" << X(c.x) << "\" cy=\"" << Y(c.y) << "\" r=\"" << o.radius * scale
               << "\" fill=\"" << label_color(o.label) << "\"" << (held ? " stroke=\"#000\"" : "") << "/>\n";
            if (o.label.size() == 1)
                os << "<text x=\"" << X(c.x) << "\" y=\"" << Y(c.y) + 4 << "\" font-size=\"10\" text-anchor=\"middle\">"
                   << o.label << "</text>\n";
        }
        Vec2 b = s.base.position();
        Vec2 head = b + task.robot.base_radius * Vec2{std::cos(s.base.theta), std::sin(s.base.theta)};
        os << "<circle cx=\"" << X(b.x) << "\" cy=\"" << Y(b.y) << "\" r=\"" << task.robot.base_radius * scale
           << "\" fill=\"none\" stroke=\"#222\"/>\n";
        os << "<line x1=\"" << X(b.x) << "\" y1=\"" << Y(b.y) << "\" x2=\"" << X(head.x) << "\" y2=\"" << Y(head.y)
           << "\" stroke=\"#222\"/>\n";
        os << "</g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace sketchplan
