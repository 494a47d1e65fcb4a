#include "ctindex/scheduler/task.hpp"

namespace ctindex::scheduler {

std::string_view to_string(Lane lane) noexcept { return lane == Lane::daily ? "daily" : "legacy"; }

std::optional<Lane> parse_lane(std::string_view text) noexcept {
    if (text == "daily") {
        return Lane::daily;
    }
    if (text == "legacy") {
        return Lane::legacy;
    }
    return std::nullopt;
}

std::string_view to_string(TaskState state) noexcept {
    switch (state) {
        case TaskState::queued: return "queued";
        case TaskState::running: return "running";
        case TaskState::done: return "done";
        case TaskState::failed: return "failed";
        case TaskState::dead: return "dead";
    }
    return "queued";
}

std::optional<TaskState> parse_task_state(std::string_view text) noexcept {
    for (auto s : {TaskState::queued, TaskState::running, TaskState::done, TaskState::failed, TaskState::dead}) {
        if (to_string(s) == text) {
            return s;
        }
    }
    return std::nullopt;
}

bool is_valid_transition(TaskState from, TaskState to) noexcept {
    switch (from) {
        case TaskState::queued: return to == TaskState::running;
        case TaskState::running: return to == TaskState::done || to == TaskState::failed;
        case TaskState::failed: return to == TaskState::queued || to == TaskState::dead;
        case TaskState::done:
        case TaskState::dead: return false;
    }
    return false;
}

}  // namespace ctindex::scheduler
