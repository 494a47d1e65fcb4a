#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <stop_token>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "ctindex/error.hpp"
#include "ctindex/scheduler/task.hpp"

namespace ctindex::scheduler {

enum class LegacyOrder { oldest_first, newest_first };
enum class RetryPlacement {
    /// Failed task keeps its place (daily FIFO slot, legacy date key).
    original_key,
    /// Failed task goes behind everything currently in its lane.
    back_of_lane,
};

struct RetryPolicy {
    std::uint32_t max_attempts = 3;
    /// Delay before attempt k+1 is eligible (entry k-1; the last entry
    /// repeats). Empty means immediate.
    std::vector<std::chrono::milliseconds> backoff;
    RetryPlacement placement = RetryPlacement::original_key;
};

struct QueueOptions {
    RetryPolicy retry;
    LegacyOrder legacy_order = LegacyOrder::oldest_first;
    /// Keep an ordered log of enqueue/dequeue/complete events.
    bool record_trace = false;
};

struct Rejection {
    std::string series_uid;
    Errc code = Errc::rejected_modality;
    std::string message;
};

struct LegacyEnqueueResult {
    std::size_t enqueued = 0;
    std::vector<Rejection> rejections;
};

struct QueueCounts {
    std::size_t total_enqueued = 0;
    std::size_t queued = 0;
    std::size_t queued_daily = 0;
    std::size_t queued_legacy = 0;
    std::size_t running = 0;
    std::size_t done = 0;
    /// Tasks parked in the transient failed state; zero outside complete().
    std::size_t failed = 0;
    std::size_t dead = 0;
};

struct TraceEvent {
    enum class Kind { enqueue, dequeue, complete };
    Kind kind = Kind::enqueue;
    std::string task_id;
    Lane lane = Lane::daily;
    Date acquisition_date{};
    std::string series_uid;
};

/// Two-lane priority queue. All members are thread-safe; dequeue-and-
/// mark-running is atomic.
class TaskQueue {
public:
    explicit TaskQueue(QueueOptions options = {});

    TaskQueue(const TaskQueue&) = delete;
    TaskQueue& operator=(const TaskQueue&) = delete;

    /// Errors: rejected_modality (non-CT), duplicate_active_task.
    IndexTask enqueue_daily(const ingest::SeriesDescriptor& series, Timestamp now);
    /// Per-item rejections are collected; valid items are still queued.
    LegacyEnqueueResult enqueue_legacy(std::span<const ingest::SeriesDescriptor> batch, Timestamp now);
    IndexTask enqueue(const ingest::SeriesDescriptor& series, Lane lane, Timestamp now);

    /// Oldest daily task, else the chronologically first legacy task.
    /// The returned task is already running.
    std::optional<IndexTask> next_task(Timestamp now);

    /// Blocks until a task is eligible, the stop token fires, or (with
    /// exit_when_idle) nothing is queued or running any more.
    std::optional<IndexTask> wait_next(std::stop_token stop, const std::function<Timestamp()>& clock,
                                       bool exit_when_idle);

    /// Errors: unknown_task, invalid_state (task not running).
    IndexTask complete(std::string_view task_id, const TaskOutcome& outcome, Timestamp now);

    [[nodiscard]] std::optional<IndexTask> find(std::string_view task_id) const;
    [[nodiscard]] QueueCounts counts() const;
    /// Earliest not_before among queued tasks that are not yet eligible.
    [[nodiscard]] std::optional<Timestamp> next_eligible_time(Timestamp now) const;
    /// Every task, in creation order.
    [[nodiscard]] std::vector<IndexTask> snapshot() const;
    [[nodiscard]] std::vector<TraceEvent> trace() const;

    /// Replaces the contents with previously snapshotted tasks. Tasks that
    /// were running are failed with reason "interrupted" and retried.
    void restore(std::vector<IndexTask> tasks, Timestamp now);

    void set_retry_policy(RetryPolicy policy);
    [[nodiscard]] RetryPolicy retry_policy() const;
    /// Wakes blocked wait_next callers.
    void notify_all();

private:
    using DailyKey = std::tuple<std::uint64_t, std::string>;
    using LegacyKey = std::tuple<std::int32_t, std::string, std::uint64_t, std::string>;

    struct Entry {
        IndexTask task;
        std::uint64_t created = 0;
        std::uint64_t order = 0;
    };

    IndexTask enqueue_locked(const ingest::SeriesDescriptor& series, Lane lane, Timestamp now);
    void insert_queued_locked(Entry& entry);
    std::optional<IndexTask> pick_locked(Timestamp now);
    void transition_locked(Entry& entry, TaskState to, Timestamp now);
    void fail_locked(Entry& entry, std::string reason, Timestamp now);
    LegacyKey legacy_key(const Entry& entry) const;
    void trace_locked(TraceEvent::Kind kind, const Entry& entry);

    mutable std::mutex mutex_;
    std::condition_variable_any cv_;
    QueueOptions options_;
    std::unordered_map<std::string, Entry> tasks_;
    std::unordered_map<std::string, std::string> active_by_series_;
    std::set<DailyKey> daily_;
    std::set<LegacyKey> legacy_;
    std::uint64_t next_seq_ = 1;
    std::uint64_t generation_ = 0;
    QueueCounts counts_;
    std::vector<TraceEvent> trace_;
};

}  // namespace ctindex::scheduler
