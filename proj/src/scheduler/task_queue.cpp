#include "ctindex/scheduler/task_queue.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace ctindex::scheduler {

namespace {

std::string make_task_id(std::uint64_t seq) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "task-%08llu", static_cast<unsigned long long>(seq));
    return buf;
}

std::size_t& state_counter(QueueCounts& c, TaskState s) {
    switch (s) {
        case TaskState::queued: return c.queued;
        case TaskState::running: return c.running;
        case TaskState::done: return c.done;
        case TaskState::failed: return c.failed;
        case TaskState::dead: return c.dead;
    }
    return c.queued;
}

}  // namespace

TaskQueue::TaskQueue(QueueOptions options) : options_(std::move(options)) {}

TaskQueue::LegacyKey TaskQueue::legacy_key(const Entry& entry) const {
    auto day = to_day_number(entry.task.series.acquisition_date);
    if (options_.legacy_order == LegacyOrder::newest_first) {
        day = -day;
    }
    return {day, entry.task.series.series_uid, entry.order, entry.task.task_id};
}

void TaskQueue::trace_locked(TraceEvent::Kind kind, const Entry& entry) {
    if (!options_.record_trace) {
        return;
    }
    trace_.push_back(TraceEvent{kind, entry.task.task_id, entry.task.lane, entry.task.series.acquisition_date,
                                entry.task.series.series_uid});
}

void TaskQueue::insert_queued_locked(Entry& entry) {
    if (entry.task.lane == Lane::daily) {
        daily_.emplace(entry.order, entry.task.task_id);
        ++counts_.queued_daily;
    } else {
        legacy_.insert(legacy_key(entry));
        ++counts_.queued_legacy;
    }
}

void TaskQueue::transition_locked(Entry& entry, TaskState to, Timestamp now) {
    if (!is_valid_transition(entry.task.state, to)) {
        throw std::logic_error("illegal task transition");
    }
    --state_counter(counts_, entry.task.state);
    ++state_counter(counts_, to);
    entry.task.state = to;
    entry.task.history.push_back({to, now});
}

IndexTask TaskQueue::enqueue_locked(const ingest::SeriesDescriptor& series, Lane lane, Timestamp now) {
    if (series.modality != ingest::Modality::CT) {
        throw Error(Errc::rejected_modality, "series '" + series.series_uid + "' has modality " +
                                                 std::string(to_string(series.modality)) + ", only CT is indexed");
    }
    if (series.series_uid.empty()) {
        throw Error(Errc::invalid_argument, "series_uid must be non-empty");
    }
    if (const auto it = active_by_series_.find(series.series_uid); it != active_by_series_.end()) {
        throw Error(Errc::duplicate_active_task,
                    "series '" + series.series_uid + "' already has active task " + it->second);
    }
    const auto seq = next_seq_++;
    Entry entry;
    entry.created = seq;
    entry.order = seq;
    entry.task.task_id = make_task_id(seq);
    entry.task.series = series;
    entry.task.lane = lane;
    entry.task.enqueued_at = now;
    entry.task.state = TaskState::queued;
    entry.task.history.push_back({TaskState::queued, now});

    auto [it, inserted] = tasks_.emplace(entry.task.task_id, std::move(entry));
    active_by_series_.emplace(series.series_uid, it->first);
    ++counts_.total_enqueued;
    ++counts_.queued;
    insert_queued_locked(it->second);
    trace_locked(TraceEvent::Kind::enqueue, it->second);
    ++generation_;
    return it->second.task;
}

IndexTask TaskQueue::enqueue_daily(const ingest::SeriesDescriptor& series, Timestamp now) {
    return enqueue(series, Lane::daily, now);
}

IndexTask TaskQueue::enqueue(const ingest::SeriesDescriptor& series, Lane lane, Timestamp now) {
    IndexTask task;
    {
        std::lock_guard lock(mutex_);
        task = enqueue_locked(series, lane, now);
    }
    cv_.notify_all();
    return task;
}

LegacyEnqueueResult TaskQueue::enqueue_legacy(std::span<const ingest::SeriesDescriptor> batch, Timestamp now) {
    LegacyEnqueueResult result;
    {
        std::lock_guard lock(mutex_);
        for (const auto& series : batch) {
            try {
                enqueue_locked(series, Lane::legacy, now);
                ++result.enqueued;
            } catch (const Error& e) {
                result.rejections.push_back({series.series_uid, e.code(), e.what()});
            }
        }
    }
    cv_.notify_all();
    return result;
}

std::optional<IndexTask> TaskQueue::pick_locked(Timestamp now) {
    const auto eligible = [&](const Entry& e) { return !e.task.not_before || *e.task.not_before <= now; };

    for (auto it = daily_.begin(); it != daily_.end(); ++it) {
        auto& entry = tasks_.at(std::get<1>(*it));
        if (!eligible(entry)) {
            continue;
        }
        daily_.erase(it);
        --counts_.queued_daily;
        ++entry.task.attempts;
        entry.task.not_before.reset();
        transition_locked(entry, TaskState::running, now);
        trace_locked(TraceEvent::Kind::dequeue, entry);
        ++generation_;
        return entry.task;
    }
    for (auto it = legacy_.begin(); it != legacy_.end(); ++it) {
        auto& entry = tasks_.at(std::get<3>(*it));
        if (!eligible(entry)) {
            continue;
        }
        legacy_.erase(it);
        --counts_.queued_legacy;
        ++entry.task.attempts;
        entry.task.not_before.reset();
        transition_locked(entry, TaskState::running, now);
        trace_locked(TraceEvent::Kind::dequeue, entry);
        ++generation_;
        return entry.task;
    }
    return std::nullopt;
}

std::optional<IndexTask> TaskQueue::next_task(Timestamp now) {
    std::lock_guard lock(mutex_);
    return pick_locked(now);
}

std::optional<IndexTask> TaskQueue::wait_next(std::stop_token stop, const std::function<Timestamp()>& clock,
                                              bool exit_when_idle) {
    std::unique_lock lock(mutex_);
    for (;;) {
        if (stop.stop_requested()) {
            return std::nullopt;
        }
        const auto now = clock();
        if (auto task = pick_locked(now)) {
            return task;
        }
        if (exit_when_idle && counts_.queued == 0 && counts_.running == 0) {
            return std::nullopt;
        }
        const auto seen = generation_;
        auto timeout = std::chrono::milliseconds(200);
        for (const auto& [id, entry] : tasks_) {
            if (entry.task.state == TaskState::queued && entry.task.not_before && *entry.task.not_before > now) {
                timeout = std::min(timeout, std::chrono::duration_cast<std::chrono::milliseconds>(
                                                *entry.task.not_before - now));
            }
        }
        cv_.wait_for(lock, stop, timeout, [&] { return generation_ != seen; });
    }
}

void TaskQueue::fail_locked(Entry& entry, std::string reason, Timestamp now) {
    transition_locked(entry, TaskState::failed, now);
    entry.task.last_error = std::move(reason);
    if (entry.task.attempts >= options_.retry.max_attempts) {
        transition_locked(entry, TaskState::dead, now);
        active_by_series_.erase(entry.task.series.series_uid);
        return;
    }
    const auto& backoff = options_.retry.backoff;
    if (!backoff.empty()) {
        const auto idx = std::min<std::size_t>(entry.task.attempts - 1, backoff.size() - 1);
        if (backoff[idx].count() > 0) {
            entry.task.not_before = now + backoff[idx];
        }
    }
    if (options_.retry.placement == RetryPlacement::back_of_lane) {
        entry.order = next_seq_++;
    }
    transition_locked(entry, TaskState::queued, now);
    insert_queued_locked(entry);
}

IndexTask TaskQueue::complete(std::string_view task_id, const TaskOutcome& outcome, Timestamp now) {
    IndexTask result;
    {
        std::lock_guard lock(mutex_);
        const auto it = tasks_.find(std::string(task_id));
        if (it == tasks_.end()) {
            throw Error(Errc::unknown_task, "no task '" + std::string(task_id) + "'");
        }
        auto& entry = it->second;
        if (entry.task.state != TaskState::running) {
            throw Error(Errc::invalid_state, "task '" + entry.task.task_id + "' is " +
                                                 std::string(to_string(entry.task.state)) + ", not running");
        }
        if (outcome.success) {
            transition_locked(entry, TaskState::done, now);
            entry.task.last_error.reset();
            active_by_series_.erase(entry.task.series.series_uid);
        } else {
            fail_locked(entry, outcome.reason, now);
        }
        trace_locked(TraceEvent::Kind::complete, entry);
        ++generation_;
        result = entry.task;
    }
    cv_.notify_all();
    return result;
}

std::optional<IndexTask> TaskQueue::find(std::string_view task_id) const {
    std::lock_guard lock(mutex_);
    const auto it = tasks_.find(std::string(task_id));
    if (it == tasks_.end()) {
        return std::nullopt;
    }
    return it->second.task;
}

QueueCounts TaskQueue::counts() const {
    std::lock_guard lock(mutex_);
    return counts_;
}

std::optional<Timestamp> TaskQueue::next_eligible_time(Timestamp now) const {
    std::lock_guard lock(mutex_);
    std::optional<Timestamp> earliest;
    for (const auto& [id, entry] : tasks_) {
        if (entry.task.state == TaskState::queued && entry.task.not_before && *entry.task.not_before > now) {
            if (!earliest || *entry.task.not_before < *earliest) {
                earliest = entry.task.not_before;
            }
        }
    }
    return earliest;
}

std::vector<IndexTask> TaskQueue::snapshot() const {
    std::lock_guard lock(mutex_);
    std::vector<const Entry*> entries;
    entries.reserve(tasks_.size());
    for (const auto& [id, entry] : tasks_) {
        entries.push_back(&entry);
    }
    std::sort(entries.begin(), entries.end(), [](const Entry* l, const Entry* r) { return l->created < r->created; });
    std::vector<IndexTask> out;
    out.reserve(entries.size());
    for (const auto* e : entries) {
        out.push_back(e->task);
    }
    return out;
}

std::vector<TraceEvent> TaskQueue::trace() const {
    std::lock_guard lock(mutex_);
    return trace_;
}

void TaskQueue::restore(std::vector<IndexTask> tasks, Timestamp now) {
    {
        std::lock_guard lock(mutex_);
        tasks_.clear();
        active_by_series_.clear();
        daily_.clear();
        legacy_.clear();
        trace_.clear();
        counts_ = {};
        next_seq_ = 1;
        for (auto& task : tasks) {
            unsigned long long seq = 0;
            if (std::sscanf(task.task_id.c_str(), "task-%llu", &seq) != 1) {
                throw Error(Errc::schema_violation, "unrecognised task id '" + task.task_id + "'");
            }
            next_seq_ = std::max<std::uint64_t>(next_seq_, seq + 1);
            Entry entry;
            entry.created = seq;
            entry.order = seq;
            entry.task = std::move(task);
            auto [it, inserted] = tasks_.emplace(entry.task.task_id, std::move(entry));
            if (!inserted) {
                throw Error(Errc::schema_violation, "task id '" + it->first + "' repeated");
            }
            auto& e = it->second;
            ++counts_.total_enqueued;
            ++state_counter(counts_, e.task.state);
            if (e.task.state == TaskState::failed) {
                // failed is transient; a persisted one is finished below.
                --counts_.failed;
                ++counts_.running;
                e.task.state = TaskState::running;
            }
            if (e.task.state == TaskState::queued || e.task.state == TaskState::running) {
                active_by_series_[e.task.series.series_uid] = e.task.task_id;
            }
            if (e.task.state == TaskState::queued) {
                insert_queued_locked(e);
            } else if (e.task.state == TaskState::running) {
                fail_locked(e, "interrupted", now);
            }
        }
        ++generation_;
    }
    cv_.notify_all();
}

void TaskQueue::set_retry_policy(RetryPolicy policy) {
    std::lock_guard lock(mutex_);
    options_.retry = std::move(policy);
}

RetryPolicy TaskQueue::retry_policy() const {
    std::lock_guard lock(mutex_);
    return options_.retry;
}

void TaskQueue::notify_all() {
    {
        std::lock_guard lock(mutex_);
        ++generation_;
    }
    cv_.notify_all();
}

}  // namespace ctindex::scheduler
