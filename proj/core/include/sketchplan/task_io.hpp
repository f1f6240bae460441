#pragma once

#include "sketchplan/world.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace sketchplan {

inline constexpr const char *kTaskFormat = "sketchplan-task/1";

/// Malformed or invalid input document. `what()` carries line/column context
/// for syntax errors.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Throws InputError if the task breaks a Task/WorldState invariant.
void validate_task(const Task &task);

std::string task_to_json(const Task &task);
Task task_from_json(const std::string &text);

Task load_task(const std::filesystem::path &path);
void save_task(const Task &task, const std::filesystem::path &path);

std::string read_text_file(const std::filesystem::path &path);
void write_text_file(const std::filesystem::path &path, const std::string &text);

}  // namespace sketchplan
