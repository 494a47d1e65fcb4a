#include "ctindex/service/api.hpp"

#include <charconv>

#include "ctindex/fhir/bundle.hpp"
#include "ctindex/scheduler/transport.hpp"
#include "ctindex/text.hpp"

namespace ctindex::service {

using nlohmann::json;

std::string to_wire(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

namespace {

ApiResponse json_response(int status, const json& body) { return {status, "application/json", to_wire(body) + "\n"}; }

ApiResponse error_response(int status, std::string_view code, std::string_view message) {
    return {status, "application/json", error_body(code, message)};
}

ApiResponse error_response(const Error& e) { return error_response(http_status(e.code()), errc_name(e.code()), e.what()); }

std::size_t parse_count(const std::map<std::string, std::string>& query, const std::string& key,
                        std::size_t fallback) {
    auto it = query.find(key);
    if (it == query.end()) {
        return fallback;
    }
    std::size_t value = 0;
    const auto& text = it->second;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || end != text.data() + text.size()) {
        throw Error(Errc::invalid_argument, "'" + key + "' must be a non-negative integer");
    }
    return value;
}

/// Splits "/a/b/c" into segments; empty segments are kept so that
/// "/tasks/" does not alias "/tasks".
std::vector<std::string_view> segments(std::string_view path) {
    std::vector<std::string_view> out;
    if (path.empty() || path.front() != '/') {
        return out;
    }
    path.remove_prefix(1);
    for (auto part : split(path, '/')) {
        out.push_back(part);
    }
    return out;
}

}  // namespace

int http_status(Errc code) noexcept {
    switch (code) {
        case Errc::not_found:
        case Errc::unknown_task:
            return 404;
        case Errc::duplicate_active_task:
        case Errc::duplicate_series_uid:
        case Errc::invalid_state:
            return 409;
        case Errc::io_error:
        case Errc::corrupt_snapshot:
        case Errc::config_invalid:
            return 500;
        default:
            return 400;
    }
}

std::string error_body(std::string_view code, std::string_view message) {
    return to_wire(json{{"error", {{"code", code}, {"message", message}}}}) + "\n";
}

json search_response(const search::Query& q, const search::SearchResult& result, search::Page page) {
    return json{{"query", search::to_text(q)},
                {"total", result.total},
                {"offset", page.offset},
                {"limit", page.limit},
                {"hits", result.hits}};
}

json coverage_json(const termmap::CoverageReport& r) {
    return json{{"label_set", std::string(ingest::to_string(r.label_set_id))},
                {"catalog_size", r.catalog_size},
                {"entry_count", r.entry_count},
                {"mapped_count", r.mapped_count()},
                {"mapped_fraction", r.mapped_fraction},
                {"unmapped_labels", r.unmapped_labels},
                {"degree_histogram",
                 {{"1", r.degree_histogram[0]},
                  {"2", r.degree_histogram[1]},
                  {"3", r.degree_histogram[2]},
                  {"4", r.degree_histogram[3]},
                  {"5", r.degree_histogram[4]}}}};
}

json mapping_entries_json(const termmap::MappingTable& table) {
    json entries = json::array();
    for (const auto& [label, e] : table.entries()) {
        entries.push_back(json{{"label", e.label},
                               {"snomed_code", e.snomed_code},
                               {"snomed_display", e.snomed_display},
                               {"radlex_id", e.radlex_id ? json(*e.radlex_id) : json(nullptr)},
                               {"equivalence_degree", e.equivalence_degree}});
    }
    return json{{"map_version", table.map_version()},
                {"label_set", std::string(ingest::to_string(table.target_label_set_id()))},
                {"entries", entries}};
}

ApiRouter::ApiRouter(IndexingService& service, Clock clock) : service_(service), clock_(std::move(clock)) {}

ApiResponse ApiRouter::handle(const ApiRequest& request) const {
    try {
        const auto& token = service_.config().auth_token;
        if (token) {
            auto it = request.headers.find("authorization");
            if (it == request.headers.end() || it->second != "Bearer " + *token) {
                return error_response(401, "unauthorized", "missing or invalid bearer token");
            }
        }
        if (request.body.size() > service_.config().max_body_bytes) {
            return error_response(413, "payload_too_large", "request body exceeds the configured limit");
        }
        return route(request);
    } catch (const Error& e) {
        return error_response(e);
    } catch (const std::exception& e) {
        return error_response(500, "internal", e.what());
    }
}

ApiResponse ApiRouter::route(const ApiRequest& request) const {
    const auto seg = segments(request.path);
    const auto& m = request.method;
    auto only = [&](std::string_view method, auto&& handler) -> ApiResponse {
        if (m != method) {
            return error_response(405, "method_not_allowed", m + " is not allowed on " + request.path);
        }
        return handler();
    };

    if (seg.size() == 1 && seg[0] == "tasks") {
        return only("POST", [&] { return post_task(request); });
    }
    if (seg.size() == 2 && seg[0] == "tasks" && !seg[1].empty()) {
        return only("GET", [&] { return get_task(seg[1]); });
    }
    if (seg.size() == 1 && seg[0] == "search") {
        return only("GET", [&] { return get_search(request); });
    }
    if (seg.size() == 3 && seg[0] == "series" && !seg[1].empty() && seg[2] == "annotations") {
        return only("GET", [&] { return get_annotations(seg[1]); });
    }
    if (seg.size() == 3 && seg[0] == "series" && !seg[1].empty() && seg[2] == "fhir") {
        return only("GET", [&] { return get_fhir(seg[1]); });
    }
    if (seg.size() == 1 && seg[0] == "metrics") {
        return only("GET", [&] { return get_metrics(); });
    }
    if (seg.size() == 2 && seg[0] == "mapping" && seg[1] == "coverage") {
        return only("GET", [&] { return json_response(200, coverage_json(service_.coverage())); });
    }
    if (seg.size() == 2 && seg[0] == "mapping" && seg[1] == "entries") {
        return only("GET", [&] { return json_response(200, mapping_entries_json(service_.mapping())); });
    }
    return error_response(404, "not_found", "no route for " + request.path);
}

ApiResponse ApiRouter::post_task(const ApiRequest& request) const {
    const auto message = scheduler::decode_task_message(request.body);
    const auto task = service_.submit(message.series, message.lane, clock_());
    return json_response(202, json{{"task_id", task.task_id}, {"state", std::string(scheduler::to_string(task.state))}});
}

ApiResponse ApiRouter::get_task(std::string_view id) const {
    const auto task = service_.queue().find(id);
    if (!task) {
        return error_response(404, "unknown_task", "no task '" + std::string(id) + "'");
    }
    return json_response(200, json::parse(scheduler::encode_task_json(*task)));
}

ApiResponse ApiRouter::get_search(const ApiRequest& request) const {
    auto q = request.query.find("q");
    if (q == request.query.end()) {
        throw Error(Errc::malformed_query, "missing 'q' parameter");
    }
    const auto query = search::parse_query(q->second);
    search::Page page;
    page.offset = parse_count(request.query, "offset", 0);
    page.limit = parse_count(request.query, "limit", service_.config().default_page_limit);
    if (page.limit > service_.config().max_page_limit) {
        throw Error(Errc::invalid_argument,
                    "limit exceeds the maximum of " + std::to_string(service_.config().max_page_limit));
    }
    return json_response(200, search_response(query, service_.search(query, page), page));
}

ApiResponse ApiRouter::get_annotations(std::string_view uid) const {
    const auto r = service_.record(uid);
    if (!r) {
        return error_response(404, "not_found", "series '" + std::string(uid) + "' is not indexed");
    }
    return {200, "application/json", annotate::serialize_annotation_set(r->annotations)};
}

ApiResponse ApiRouter::get_fhir(std::string_view uid) const {
    return {200, "application/fhir+json", fhir::serialize_bundle(service_.bundle(uid))};
}

ApiResponse ApiRouter::get_metrics() const { return {200, "text/plain; charset=utf-8", service_.metrics_text()}; }

}  // namespace ctindex::service
