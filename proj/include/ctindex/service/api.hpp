#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ctindex/error.hpp"
#include "ctindex/search/index.hpp"
#include "ctindex/service/indexing_service.hpp"

namespace ctindex::service {

struct ApiRequest {
    std::string method;
    /// Decoded path without the query string.
    std::string path;
    std::map<std::string, std::string> query;
    /// Header names lower-cased.
    std::map<std::string, std::string> headers;
    std::string body;
};

struct ApiResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

/// Compact JSON; invalid UTF-8 in strings is replaced, never thrown.
std::string to_wire(const nlohmann::json& j);

/// HTTP status for an error category.
int http_status(Errc code) noexcept;

/// `{"error":{"code":...,"message":...}}`
std::string error_body(std::string_view code, std::string_view message);

/// Search response body shared by the API and the CLI.
nlohmann::json search_response(const search::Query& q, const search::SearchResult& result, search::Page page);
nlohmann::json coverage_json(const termmap::CoverageReport& report);
nlohmann::json mapping_entries_json(const termmap::MappingTable& table);

/// Transport-independent request handling. Never throws; every failure
/// becomes an error response.
class ApiRouter {
public:
    using Clock = std::function<Timestamp()>;

    explicit ApiRouter(IndexingService& service, Clock clock = now_utc);

    ApiResponse handle(const ApiRequest& request) const;

private:
    IndexingService& service_;
    Clock clock_;

    ApiResponse route(const ApiRequest& request) const;
    ApiResponse post_task(const ApiRequest& request) const;
    ApiResponse get_task(std::string_view id) const;
    ApiResponse get_search(const ApiRequest& request) const;
    ApiResponse get_annotations(std::string_view uid) const;
    ApiResponse get_fhir(std::string_view uid) const;
    ApiResponse get_metrics() const;
};

}  // namespace ctindex::service
