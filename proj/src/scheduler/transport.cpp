#include "ctindex/scheduler/transport.hpp"

#include <json.hpp>

namespace ctindex::scheduler {

using nlohmann::json;

void InProcessTransport::publish(TransportMessage message) {
    std::lock_guard lock(mutex_);
    auto topic = message.topic;
    topics_[topic].push_back(std::move(message));
}

std::optional<TransportMessage> InProcessTransport::poll(std::string_view topic) {
    std::lock_guard lock(mutex_);
    const auto it = topics_.find(topic);
    if (it == topics_.end() || it->second.empty()) {
        return std::nullopt;
    }
    auto message = std::move(it->second.front());
    it->second.pop_front();
    return message;
}

std::size_t InProcessTransport::depth(std::string_view topic) const {
    std::lock_guard lock(mutex_);
    const auto it = topics_.find(topic);
    return it == topics_.end() ? 0 : it->second.size();
}

json series_to_json(const ingest::SeriesDescriptor& s) {
    json j{{"series_uid", s.series_uid},
           {"study_uid", s.study_uid},
           {"patient_pseudonym", s.patient_pseudonym},
           {"acquisition_date", format_iso_date(s.acquisition_date)},
           {"modality", std::string(to_string(s.modality))},
           {"source", std::string(to_string(s.source))}};
    if (s.body_region_hint) {
        j["body_region_hint"] = *s.body_region_hint;
    }
    return j;
}

namespace {

template <typename T>
T get_field(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) {
        throw Error(Errc::schema_violation, std::string("missing field '") + key + "'");
    }
    return it->get<T>();
}

}  // namespace

ingest::SeriesDescriptor series_from_json(const json& j) try {
    if (!j.is_object()) {
        throw Error(Errc::schema_violation, "series must be an object");
    }
    ingest::SeriesDescriptor s;
    s.series_uid = get_field<std::string>(j, "series_uid");
    s.study_uid = get_field<std::string>(j, "study_uid");
    s.patient_pseudonym = get_field<std::string>(j, "patient_pseudonym");
    if (s.series_uid.empty() || s.study_uid.empty() || s.patient_pseudonym.empty()) {
        throw Error(Errc::schema_violation, "series identifiers must be non-empty");
    }
    const auto date = parse_iso_date(get_field<std::string>(j, "acquisition_date"));
    if (!date) {
        throw Error(Errc::schema_violation, "acquisition_date must be YYYY-MM-DD");
    }
    s.acquisition_date = *date;
    const auto modality = ingest::parse_modality(get_field<std::string>(j, "modality"));
    if (!modality) {
        throw Error(Errc::schema_violation, "unknown modality");
    }
    s.modality = *modality;
    if (const auto it = j.find("source"); it != j.end()) {
        const auto source = ingest::parse_source(it->get<std::string>());
        if (!source) {
            throw Error(Errc::schema_violation, "source must be daily or legacy");
        }
        s.source = *source;
    }
    if (const auto it = j.find("body_region_hint"); it != j.end() && !it->is_null()) {
        s.body_region_hint = it->get<std::string>();
    }
    return s;
} catch (const json::exception& e) {
    throw Error(Errc::schema_violation, std::string("series field has wrong type: ") + e.what());
}

namespace {

json parse_json(std::string_view payload) {
    try {
        return json::parse(payload.begin(), payload.end());
    } catch (const json::exception& e) {
        throw Error(Errc::malformed_file, std::string("message is not valid JSON: ") + e.what());
    }
}

}  // namespace

std::string encode_task_message(const TaskMessage& message) {
    return json{{"series", series_to_json(message.series)}, {"lane", std::string(to_string(message.lane))}}.dump();
}

TaskMessage decode_task_message(std::string_view payload) {
    const auto j = parse_json(payload);
    try {
        if (!j.is_object()) {
            throw Error(Errc::schema_violation, "task message must be an object");
        }
        TaskMessage m;
        const auto series = j.find("series");
        if (series == j.end() || !series->is_object()) {
            throw Error(Errc::schema_violation, "task message lacks 'series' object");
        }
        m.series = series_from_json(*series);
        const auto lane = parse_lane(get_field<std::string>(j, "lane"));
        if (!lane) {
            throw Error(Errc::schema_violation, "lane must be daily or legacy");
        }
        m.lane = *lane;
        return m;
    } catch (const json::exception& e) {
        throw Error(Errc::schema_violation, std::string("task message field has wrong type: ") + e.what());
    }
}

std::string encode_task_json(const IndexTask& task) {
    json history = json::array();
    for (const auto& h : task.history) {
        history.push_back({{"state", std::string(to_string(h.state))}, {"at", format_timestamp(h.at)}});
    }
    json j{{"task_id", task.task_id},
           {"series", series_to_json(task.series)},
           {"lane", std::string(to_string(task.lane))},
           {"enqueued_at", format_timestamp(task.enqueued_at)},
           {"state", std::string(to_string(task.state))},
           {"attempts", task.attempts},
           {"history", std::move(history)}};
    j["last_error"] = task.last_error ? json(*task.last_error) : json(nullptr);
    if (task.not_before) {
        j["not_before"] = format_timestamp(*task.not_before);
    }
    return j.dump();
}

IndexTask decode_task_json(std::string_view payload) {
    const auto j = parse_json(payload);
    try {
        IndexTask t;
        t.task_id = get_field<std::string>(j, "task_id");
        t.series = series_from_json(j.at("series"));
        const auto lane = parse_lane(get_field<std::string>(j, "lane"));
        const auto state = parse_task_state(get_field<std::string>(j, "state"));
        const auto enqueued = parse_timestamp(get_field<std::string>(j, "enqueued_at"));
        if (!lane || !state || !enqueued) {
            throw Error(Errc::schema_violation, "task has bad lane, state or enqueued_at");
        }
        t.lane = *lane;
        t.state = *state;
        t.enqueued_at = *enqueued;
        t.attempts = get_field<std::uint32_t>(j, "attempts");
        if (const auto it = j.find("last_error"); it != j.end() && !it->is_null()) {
            t.last_error = it->get<std::string>();
        }
        if (const auto it = j.find("not_before"); it != j.end()) {
            t.not_before = parse_timestamp(it->get<std::string>());
        }
        for (const auto& h : j.at("history")) {
            const auto s = parse_task_state(h.at("state").get<std::string>());
            const auto at = parse_timestamp(h.at("at").get<std::string>());
            if (!s || !at) {
                throw Error(Errc::schema_violation, "bad task history entry");
            }
            t.history.push_back({*s, *at});
        }
        return t;
    } catch (const json::exception& e) {
        throw Error(Errc::schema_violation, std::string("task field has wrong type: ") + e.what());
    }
}

std::size_t pump_tasks(QueueTransport& transport, TaskQueue& queue, Timestamp now) {
    std::size_t moved = 0;
    while (auto message = transport.poll(kTaskTopic)) {
        try {
            const auto m = decode_task_message(message->payload);
            queue.enqueue(m.series, m.lane, now);
            ++moved;
        } catch (const Error& e) {
            json err{{"key", message->key},
                     {"error", {{"code", std::string(errc_name(e.code()))}, {"message", e.what()}}}};
            transport.publish({std::string(kResultTopic), message->key,
                               err.dump(-1, ' ', false, json::error_handler_t::replace)});
        }
    }
    return moved;
}

void publish_result(QueueTransport& transport, const IndexTask& task) {
    transport.publish({std::string(kResultTopic), task.series.series_uid, encode_task_json(task)});
}

}  // namespace ctindex::scheduler
