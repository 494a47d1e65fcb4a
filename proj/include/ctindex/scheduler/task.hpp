#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctindex/ingest/series.hpp"
#include "ctindex/time.hpp"

namespace ctindex::scheduler {

enum class Lane { daily, legacy };
enum class TaskState { queued, running, done, failed, dead };

std::string_view to_string(Lane lane) noexcept;
std::optional<Lane> parse_lane(std::string_view text) noexcept;
std::string_view to_string(TaskState state) noexcept;
std::optional<TaskState> parse_task_state(std::string_view text) noexcept;

/// Legal edges: queued->running, running->done, running->failed,
/// failed->queued, failed->dead.
bool is_valid_transition(TaskState from, TaskState to) noexcept;

struct StateChange {
    TaskState state = TaskState::queued;
    Timestamp at{};

    friend bool operator==(const StateChange&, const StateChange&) = default;
};

struct IndexTask {
    std::string task_id;
    ingest::SeriesDescriptor series;
    Lane lane = Lane::daily;
    Timestamp enqueued_at{};
    TaskState state = TaskState::queued;
    std::uint32_t attempts = 0;
    std::optional<std::string> last_error;
    /// Earliest time a retried task may run again (retry backoff).
    std::optional<Timestamp> not_before;
    std::vector<StateChange> history;

    friend bool operator==(const IndexTask&, const IndexTask&) = default;
};

struct TaskOutcome {
    bool success = true;
    std::string reason;

    static TaskOutcome ok() { return {}; }
    static TaskOutcome failure(std::string why) { return {false, std::move(why)}; }
};

}  // namespace ctindex::scheduler
