#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <stop_token>
#include <vector>

#include "ctindex/scheduler/task_queue.hpp"

namespace ctindex::scheduler {

enum class ClockMode { real, virtual_clock };
enum class StopMode {
    /// Running tasks finish and their outcomes are recorded.
    graceful,
    /// Running tasks are recorded as failed ("interrupted") when they return.
    immediate,
};

struct PoolConfig {
    std::size_t worker_count = 8;
    std::uint32_t max_attempts = 3;
    std::vector<std::chrono::milliseconds> retry_backoff;
    ClockMode clock = ClockMode::real;
    /// Simulation epoch for the virtual clock.
    Timestamp virtual_start = Timestamp{std::chrono::sys_days{std::chrono::year{2024} / 3 / 1}};
    /// No task is started at or after start + time_limit.
    std::optional<std::chrono::milliseconds> time_limit;
    /// Return once nothing is queued or running (real clock only; the
    /// virtual clock always stops when idle).
    bool exit_when_idle = true;
    StopMode stop_mode = StopMode::graceful;
};

/// Handed to the pipeline for each attempt.
struct TaskContext {
    Timestamp started_at{};
    std::size_t worker = 0;
    /// Service time the attempt takes on the virtual clock. Ignored with
    /// the real clock, where elapsed time is measured.
    std::chrono::milliseconds service_time{0};
    std::stop_token stop;
};

using TaskPipeline = std::function<TaskOutcome(const IndexTask&, TaskContext&)>;

struct ThroughputReport {
    Timestamp window_start{};
    Timestamp window_end{};
    std::size_t completed = 0;
    /// Failed attempts (including ones that were retried).
    std::size_t failed = 0;
    std::size_t dead = 0;
    double series_per_hour = 0.0;
    std::vector<std::chrono::milliseconds> busy_time_per_worker;
    std::chrono::milliseconds total_busy_time{0};

    [[nodiscard]] double window_hours() const noexcept;
};

/// Processes tasks from `queue` with up to worker_count concurrent
/// attempts. Throws Errc::config_invalid for worker_count or max_attempts
/// of zero. Exceptions thrown by the pipeline become task failures.
ThroughputReport run_pool(TaskQueue& queue, const PoolConfig& config, const TaskPipeline& pipeline,
                          std::stop_token stop = {});

}  // namespace ctindex::scheduler
