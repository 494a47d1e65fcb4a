#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "ctindex/annotate/annotate.hpp"
#include "ctindex/ingest/label_catalog.hpp"
#include "ctindex/scheduler/task_queue.hpp"
#include "ctindex/scheduler/worker_pool.hpp"

namespace ctindex::service {

inline constexpr std::string_view kIndexerName = "ct-indexer";
inline constexpr std::string_view kIndexerVersion = "1.0.0";

/// Where segmentation statistics come from.
enum class Backend {
    /// Deterministic mock segmenter (no image data needed).
    mock,
    /// `<stats_dir>/<series_uid>.segstats.json` written by a real segmenter.
    files,
};

std::string_view to_string(Backend b) noexcept;

struct ServiceConfig {
    std::string listen_host = "127.0.0.1";
    std::uint16_t listen_port = 8080;
    std::filesystem::path data_dir = "ctindex-data";
    std::filesystem::path mapping_path;
    std::filesystem::path catalog_dir;
    /// Defaults to <data_dir>/stats when empty.
    std::filesystem::path stats_dir;
    ingest::LabelSetId label_set_id = ingest::LabelSetId::v1_104;
    scheduler::PoolConfig pool;
    scheduler::LegacyOrder legacy_order = scheduler::LegacyOrder::oldest_first;
    annotate::AnnotationPolicy policy;
    std::size_t bundle_size = 100;
    std::optional<std::string> auth_token;

    Backend backend = Backend::mock;
    std::uint64_t seed = 0;
    double mock_mean_structures = 37.0;
    /// Declared service time per mocked series (virtual clock).
    std::chrono::milliseconds mock_service_time{144'000};

    std::size_t default_page_limit = 50;
    std::size_t max_page_limit = 1000;
    std::size_t max_body_bytes = 1 << 20;

    /// Bundled mapping table and catalogs.
    static ServiceConfig defaults();

    [[nodiscard]] std::filesystem::path effective_stats_dir() const;
};

/// Recognized keys, shared by the config file, the CTINDEX_* environment
/// variables (upper-cased) and the CLI flags:
///
///   listen, data_dir, mapping, catalogs, stats_dir, label_set, workers,
///   max_attempts, retry_backoff_ms, legacy_order, policy, min_volume_mm3,
///   bundle_size, auth_token, backend, seed, mock_mean_structures,
///   mock_service_seconds, default_page_limit, max_page_limit,
///   max_body_bytes
///
/// Errors: config_invalid (unknown key or unparsable value).
void set_option(ServiceConfig& config, std::string_view key, std::string_view value);

/// Flat JSON object of the keys above. Errors: config_invalid, io_error.
void apply_config_file(ServiceConfig& config, const std::filesystem::path& path);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
/// Applies every CTINDEX_<KEY> variable that is set.
void apply_environment(ServiceConfig& config, const EnvLookup& lookup);
EnvLookup process_environment();

/// Startup checks: mapping and catalog paths exist, worker_count >= 1,
/// bundle_size >= 1, page limits consistent. Errors: config_invalid.
void validate_config(const ServiceConfig& config);

}  // namespace ctindex::service
