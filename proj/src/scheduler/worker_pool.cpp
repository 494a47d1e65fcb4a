#include "ctindex/scheduler/worker_pool.hpp"

#include <atomic>
#include <mutex>
#include <queue>
#include <thread>

namespace ctindex::scheduler {

double ThroughputReport::window_hours() const noexcept {
    return std::chrono::duration<double, std::ratio<3600>>(window_end - window_start).count();
}

namespace {

void validate(const PoolConfig& config) {
    if (config.worker_count == 0) {
        throw Error(Errc::config_invalid, "worker_count must be at least 1");
    }
    if (config.max_attempts == 0) {
        throw Error(Errc::config_invalid, "max_attempts must be at least 1");
    }
    if (config.time_limit && config.time_limit->count() < 0) {
        throw Error(Errc::config_invalid, "time_limit must be non-negative");
    }
    for (const auto& d : config.retry_backoff) {
        if (d.count() < 0) {
            throw Error(Errc::config_invalid, "retry backoff entries must be non-negative");
        }
    }
}

TaskOutcome run_attempt(const TaskPipeline& pipeline, const IndexTask& task, TaskContext& ctx) {
    try {
        return pipeline(task, ctx);
    } catch (const std::exception& e) {
        return TaskOutcome::failure(e.what());
    } catch (...) {
        return TaskOutcome::failure("unknown exception");
    }
}

void finalize(ThroughputReport& report) {
    for (const auto& b : report.busy_time_per_worker) {
        report.total_busy_time += b;
    }
    const double hours = report.window_hours();
    report.series_per_hour = hours > 0.0 ? static_cast<double>(report.completed) / hours : 0.0;
}

void account(ThroughputReport& report, const IndexTask& after) {
    if (after.state == TaskState::done) {
        ++report.completed;
        return;
    }
    ++report.failed;
    if (after.state == TaskState::dead) {
        ++report.dead;
    }
}

// Discrete-event simulation: dispatch order and completion times depend
// only on declared service times, so runs are reproducible.
ThroughputReport run_virtual(TaskQueue& queue, const PoolConfig& config, const TaskPipeline& pipeline,
                             std::stop_token stop) {
    struct Running {
        Timestamp finish;
        std::size_t worker;
        IndexTask task;
        TaskOutcome outcome;
        std::chrono::milliseconds service;
    };
    struct Later {
        bool operator()(const Running& l, const Running& r) const {
            return l.finish != r.finish ? l.finish > r.finish : l.worker > r.worker;
        }
    };

    ThroughputReport report;
    report.busy_time_per_worker.assign(config.worker_count, std::chrono::milliseconds{0});
    report.window_start = config.virtual_start;
    Timestamp now = config.virtual_start;
    const std::optional<Timestamp> deadline =
        config.time_limit ? std::optional<Timestamp>(config.virtual_start + *config.time_limit) : std::nullopt;

    std::vector<bool> busy(config.worker_count, false);
    std::priority_queue<Running, std::vector<Running>, Later> events;
    bool stopping = false;

    for (;;) {
        if (stop.stop_requested() && !stopping) {
            stopping = true;
            if (config.stop_mode == StopMode::immediate) {
                while (!events.empty()) {
                    auto r = events.top();
                    events.pop();
                    account(report, queue.complete(r.task.task_id, TaskOutcome::failure("interrupted"), now));
                }
                break;
            }
        }
        const bool may_start = !stopping && (!deadline || now < *deadline);
        if (may_start) {
            for (std::size_t w = 0; w < config.worker_count; ++w) {
                if (busy[w]) {
                    continue;
                }
                auto task = queue.next_task(now);
                if (!task) {
                    break;
                }
                TaskContext ctx;
                ctx.started_at = now;
                ctx.worker = w;
                ctx.stop = stop;
                auto outcome = run_attempt(pipeline, *task, ctx);
                const auto service = std::max(ctx.service_time, std::chrono::milliseconds{0});
                busy[w] = true;
                events.push(Running{now + service, w, std::move(*task), std::move(outcome), service});
            }
        }
        if (events.empty()) {
            if (may_start) {
                if (const auto wake = queue.next_eligible_time(now); wake && (!deadline || *wake < *deadline)) {
                    now = *wake;
                    continue;
                }
            }
            break;
        }
        auto r = events.top();
        events.pop();
        now = r.finish;
        busy[r.worker] = false;
        report.busy_time_per_worker[r.worker] += r.service;
        account(report, queue.complete(r.task.task_id, r.outcome, now));
    }
    report.window_end = now;
    finalize(report);
    return report;
}

ThroughputReport run_real(TaskQueue& queue, const PoolConfig& config, const TaskPipeline& pipeline,
                          std::stop_token external) {
    ThroughputReport report;
    report.busy_time_per_worker.assign(config.worker_count, std::chrono::milliseconds{0});
    report.window_start = now_utc();

    std::stop_source internal;
    std::stop_callback forward(external, [&] { internal.request_stop(); });
    std::mutex report_mutex;

    std::optional<std::jthread> timer;
    if (config.time_limit) {
        timer.emplace([&internal, limit = *config.time_limit](std::stop_token st) {
            std::mutex m;
            std::condition_variable_any cv;
            std::unique_lock lock(m);
            cv.wait_for(lock, st, limit, [] { return false; });
            if (!st.stop_requested()) {
                internal.request_stop();
            }
        });
    }

    const auto clock = [] { return now_utc(); };
    {
        std::vector<std::jthread> workers;
        workers.reserve(config.worker_count);
        for (std::size_t w = 0; w < config.worker_count; ++w) {
            workers.emplace_back([&, w] {
                const auto token = internal.get_token();
                for (;;) {
                    auto task = queue.wait_next(token, clock, config.exit_when_idle);
                    if (!task) {
                        return;
                    }
                    TaskContext ctx;
                    ctx.started_at = clock();
                    ctx.worker = w;
                    ctx.stop = token;
                    const auto t0 = std::chrono::steady_clock::now();
                    auto outcome = run_attempt(pipeline, *task, ctx);
                    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0);
                    if (token.stop_requested() && config.stop_mode == StopMode::immediate) {
                        outcome = TaskOutcome::failure("interrupted");
                    }
                    const auto after = queue.complete(task->task_id, outcome, clock());
                    std::lock_guard lock(report_mutex);
                    report.busy_time_per_worker[w] += elapsed;
                    account(report, after);
                }
            });
        }
    }
    if (timer) {
        timer->request_stop();
    }
    report.window_end = now_utc();
    finalize(report);
    return report;
}

}  // namespace

ThroughputReport run_pool(TaskQueue& queue, const PoolConfig& config, const TaskPipeline& pipeline,
                          std::stop_token stop) {
    validate(config);
    auto policy = queue.retry_policy();
    policy.max_attempts = config.max_attempts;
    policy.backoff = config.retry_backoff;
    queue.set_retry_policy(std::move(policy));
    if (config.clock == ClockMode::virtual_clock) {
        return run_virtual(queue, config, pipeline, stop);
    }
    return run_real(queue, config, pipeline, stop);
}

}  // namespace ctindex::scheduler
