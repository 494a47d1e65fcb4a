#pragma once

#include <deque>
#include <json.hpp>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "ctindex/scheduler/task_queue.hpp"

namespace ctindex::scheduler {

inline constexpr std::string_view kTaskTopic = "ct-index-tasks";
inline constexpr std::string_view kResultTopic = "ct-index-results";

struct TransportMessage {
    std::string topic;
    std::string key;
    std::string payload;
};

/// Message-broker seam. The embedded implementation below is the default;
/// a wire-protocol adapter implements the same two calls.
class QueueTransport {
public:
    virtual ~QueueTransport() = default;
    virtual void publish(TransportMessage message) = 0;
    virtual std::optional<TransportMessage> poll(std::string_view topic) = 0;
};

class InProcessTransport final : public QueueTransport {
public:
    void publish(TransportMessage message) override;
    std::optional<TransportMessage> poll(std::string_view topic) override;
    [[nodiscard]] std::size_t depth(std::string_view topic) const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::deque<TransportMessage>, std::less<>> topics_;
};

struct TaskMessage {
    ingest::SeriesDescriptor series;
    Lane lane = Lane::daily;
};

/// Object form shared by task messages and the HTTP API.
nlohmann::json series_to_json(const ingest::SeriesDescriptor& series);
/// Errors: schema_violation.
ingest::SeriesDescriptor series_from_json(const nlohmann::json& j);

/// JSON payloads. decode_* throw Errc::malformed_file / schema_violation.
std::string encode_task_message(const TaskMessage& message);
TaskMessage decode_task_message(std::string_view payload);
std::string encode_task_json(const IndexTask& task);
IndexTask decode_task_json(std::string_view payload);

/// Moves every pending task message into the queue. Invalid messages and
/// rejected series are published to the result topic as errors.
std::size_t pump_tasks(QueueTransport& transport, TaskQueue& queue, Timestamp now);

/// Publishes the terminal state of a task to the result topic.
void publish_result(QueueTransport& transport, const IndexTask& task);

}  // namespace ctindex::scheduler
