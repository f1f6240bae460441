#include "sketchplan/task_io.hpp"

#include "json_util.hpp"

#include <fstream>
#include <sstream>

namespace sketchplan {

using detail::json;

namespace detail {

json parse_document(const std::string &text, const char *what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::size_t bol = text.rfind('\n', e.byte > 1 ? e.byte - 2 : 0);
        bol = bol == std::string::npos ? 0 : bol + 1;
        std::size_t eol = text.find('\n', bol);
        std::ostringstream msg;
        msg << what << ": syntax error at line " << line << ", column " << col << ": "
            << text.substr(bol, eol == std::string::npos ? std::string::npos : eol - bol);
        throw InputError(msg.str());
    }
}

json action_to_json(const ConcreteAction &a) {
    if (const auto *p = std::get_if<PickMotion>(&a))
        return {{"type", "pick"}, {"object", p->object}, {"grasp", p->grasp}, {"base", pose_to_json(p->base)}};
    if (const auto *p = std::get_if<PlaceMotion>(&a))
        return {{"type", "place"},      {"object", p->object}, {"placement", pose_to_json(p->placement)},
                {"table", p->table},    {"sop", p->sop},       {"base", pose_to_json(p->base)}};
    const auto &m = std::get<MoveBaseMotion>(a);
    return {{"type", "move_base"}, {"from", pose_to_json(m.from)}, {"to", pose_to_json(m.to)}};
}

ConcreteAction action_from_json(const json &j) {
    std::string type = j.at("type").get<std::string>();
    if (type == "pick")
        return PickMotion{j.at("object").get<int>(), j.at("grasp").get<double>(), pose_from_json(j.at("base"))};
    if (type == "place")
        return PlaceMotion{j.at("object").get<int>(), pose_from_json(j.at("placement")), j.at("table").get<int>(),
                           j.value("sop", 0), pose_from_json(j.at("base"))};
    if (type == "move_base")
        return MoveBaseMotion{pose_from_json(j.at("from")), pose_from_json(j.at("to"))};
    throw InputError("unknown action type '" + type + "'");
}

}  // namespace detail

namespace {

json goal_to_json(const GoalSpec &g) {
    return std::visit(
        [](const auto &v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, GoalNone>)
                return {{"type", "none"}};
            else if constexpr (std::is_same_v<T, AbsoluteRegion>)
                return {{"type", "region"}, {"table", v.table_id}, {"region", detail::rect_to_json(v.region)}};
            else if constexpr (std::is_same_v<T, ExactPose>)
                return {{"type", "pose"}, {"pose", detail::pose_to_json(v.pose)}, {"tolerance", v.tolerance}};
            else
                return {{"type", "word"}, {"slot", v.slot}};
        },
        g);
}

GoalSpec goal_from_json(const json &j) {
    std::string type = j.at("type").get<std::string>();
    if (type == "none")
        return GoalNone{};
    if (type == "region")
        return AbsoluteRegion{j.at("table").get<int>(), detail::rect_from_json(j.at("region"))};
    if (type == "pose")
        return ExactPose{detail::pose_from_json(j.at("pose")), j.at("tolerance").get<double>()};
    if (type == "word")
        return RelativeWord{j.at("slot").get<int>()};
    throw InputError("unknown goal type '" + type + "'");
}

}  // namespace

void validate_task(const Task &task) {
    auto fail = [](const std::string &m) { throw InputError("invalid task: " + m); };
    if (task.arena.half.x <= 0 || task.arena.half.y <= 0)
        fail("arena half-extents must be positive");
    for (std::size_t i = 0; i < task.tables.size(); ++i) {
        const Table &t = task.tables[i];
        if (t.id != static_cast<int>(i))
            fail("table ids must be 0..n-1 in order");
        if (t.rect.half.x <= 0 || t.rect.half.y <= 0)
            fail("table half-extents must be positive");
        for (std::size_t k = 0; k < i; ++k)
            if (t.rect.overlaps(task.tables[k].rect))
                fail("tables overlap");
    }
    for (std::size_t i = 0; i < task.objects.size(); ++i) {
        const MovableObject &o = task.objects[i];
        if (o.id != static_cast<int>(i))
            fail("object ids must be 0..n-1 in order");
        if (!(o.radius > 0))
            fail("object radius must be positive");
        if (const auto *r = std::get_if<AbsoluteRegion>(&o.goal)) {
            if (r->table_id < 0 || static_cast<std::size_t>(r->table_id) >= task.tables.size())
                fail("goal region references unknown table");
            const Rect &tr = task.table(r->table_id).rect;
            if (r->region.min_x() < tr.min_x() - 1e-9 || r->region.max_x() > tr.max_x() + 1e-9 ||
                r->region.min_y() < tr.min_y() - 1e-9 || r->region.max_y() > tr.max_y() + 1e-9)
                fail("goal region not within its table");
        }
        if (const auto *p = std::get_if<ExactPose>(&o.goal); p && !(p->tolerance > 0))
            fail("exact-pose goal tolerance must be positive");
        if (std::holds_alternative<RelativeWord>(o.goal) && task.family != Family::Words)
            fail("word goals require the words family");
    }
    if (!(task.robot.reach_min > 0 && task.robot.reach_min < task.robot.reach_max))
        fail("require 0 < reach_min < reach_max");
    if (!(task.robot.base_radius > 0))
        fail("base radius must be positive");
    if (task.family == Family::Words && task.word.empty())
        fail("words family requires a word");
    if (task.start.held && (task.start.held->object < 0 ||
                            static_cast<std::size_t>(task.start.held->object) >= task.objects.size()))
        fail("held object id out of range");
    if (auto err = check_state(task, task.start))
        fail("start state: " + *err);
}

std::string task_to_json(const Task &task) {
    json j;
    j["format"] = kTaskFormat;
    j["family"] = to_string(task.family);
    j["word"] = task.word;
    j["arena"] = detail::rect_to_json(task.arena);
    j["tables"] = json::array();
    for (const Table &t : task.tables)
        j["tables"].push_back({{"id", t.id},
                               {"center", detail::vec_to_json(t.rect.center)},
                               {"half", detail::vec_to_json(t.rect.half)},
                               {"support_height", t.support_height}});
    j["objects"] = json::array();
    for (const MovableObject &o : task.objects)
        j["objects"].push_back({{"id", o.id}, {"radius", o.radius}, {"label", o.label}, {"goal", goal_to_json(o.goal)}});
    j["robot"] = {{"base_radius", task.robot.base_radius},
                  {"reach_min", task.robot.reach_min},
                  {"reach_max", task.robot.reach_max},
                  {"single_home_configuration", task.robot.single_home_configuration}};
    j["word_layout"] = {{"pitch_factor", task.word_layout.pitch_factor},
                        {"tolerance_factor", task.word_layout.tolerance_factor},
                        {"margin_factor", task.word_layout.margin_factor}};
    json start;
    start["base"] = detail::pose_to_json(task.start.base);
    start["held"] = task.start.held ? json{{"object", task.start.held->object}, {"grasp", task.start.held->grasp}}
                                    : json(nullptr);
    start["objects"] = json::array();
    for (const auto &[id, p] : task.start.object_poses)
        start["objects"].push_back({{"id", id}, {"pose", detail::pose_to_json(p)}});
    j["start"] = start;
    return j.dump(2) + "\n";
}

Task task_from_json(const std::string &text) {
    json j = detail::parse_document(text, "task");
    try {
        if (j.value("format", std::string{}) != kTaskFormat)
            throw InputError(std::string("task: expected \"format\": \"") + kTaskFormat + "\"");
        Task task;
        task.family = family_from_string(j.at("family").get<std::string>());
        task.word = j.value("word", std::string{});
        task.arena = detail::rect_from_json(j.at("arena"));
        for (const json &t : j.at("tables"))
            task.tables.push_back({t.at("id").get<int>(),
                                   {detail::vec_from_json(t.at("center")), detail::vec_from_json(t.at("half"))},
                                   t.value("support_height", 0.75)});
        for (const json &o : j.at("objects"))
            task.objects.push_back({o.at("id").get<int>(), o.at("radius").get<double>(),
                                    o.value("label", std::string{}), goal_from_json(o.at("goal"))});
        const json &r = j.at("robot");
        task.robot.base_radius = r.at("base_radius").get<double>();
        task.robot.reach_min = r.at("reach_min").get<double>();
        task.robot.reach_max = r.at("reach_max").get<double>();
        task.robot.single_home_configuration = r.value("single_home_configuration", true);
        if (j.contains("word_layout")) {
            const json &w = j.at("word_layout");
            task.word_layout.pitch_factor = w.value("pitch_factor", 2.5);
            task.word_layout.tolerance_factor = w.value("tolerance_factor", 0.25);
            task.word_layout.margin_factor = w.value("margin_factor", 1.0);
        }
        const json &s = j.at("start");
        task.start.base = detail::pose_from_json(s.at("base"));
        if (s.contains("held") && !s.at("held").is_null())
            task.start.held = Held{s.at("held").at("object").get<int>(), s.at("held").at("grasp").get<double>()};
        for (const json &o : s.at("objects"))
            task.start.object_poses[o.at("id").get<int>()] = detail::pose_from_json(o.at("pose"));
        validate_task(task);
        return task;
    } catch (const json::exception &e) {
        throw InputError(std::string("task: ") + e.what());
    } catch (const std::invalid_argument &e) {
        throw InputError(std::string("task: ") + e.what());
    }
}

std::string read_text_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << text;
}

Task load_task(const std::filesystem::path &path) { return task_from_json(read_text_file(path)); }

void save_task(const Task &task, const std::filesystem::path &path) { write_text_file(path, task_to_json(task)); }

}  // namespace sketchplan
