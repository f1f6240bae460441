#pragma once

#include "sketchplan/task_io.hpp"
#include "sketchplan/world.hpp"

#include <json.hpp>

#include <string>

namespace sketchplan::detail {

using nlohmann::json;

inline json pose_to_json(const Pose2 &p) { return json::array({p.x, p.y, p.theta}); }

inline Pose2 pose_from_json(const json &j) {
    if (!j.is_array() || j.size() != 3)
        throw InputError("pose must be an [x, y, theta] array");
    return Pose2(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

inline json vec_to_json(Vec2 v) { return json::array({v.x, v.y}); }

inline Vec2 vec_from_json(const json &j) {
    if (!j.is_array() || j.size() != 2)
        throw InputError("point must be an [x, y] array");
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

inline json rect_to_json(const Rect &r) { return {{"center", vec_to_json(r.center)}, {"half", vec_to_json(r.half)}}; }

inline Rect rect_from_json(const json &j) { return {vec_from_json(j.at("center")), vec_from_json(j.at("half"))}; }

json action_to_json(const ConcreteAction &a);
ConcreteAction action_from_json(const json &j);

/// Parses `text`, translating syntax errors into InputError with line context.
json parse_document(const std::string &text, const char *what);

}  // namespace sketchplan::detail
