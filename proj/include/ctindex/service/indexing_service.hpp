#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stop_token>
#include <string>
#include <string_view>
#include <vector>

#include "ctindex/annotate/annotate.hpp"
#include "ctindex/fhir/bundle.hpp"
#include "ctindex/fhir/resources.hpp"
#include "ctindex/ingest/label_catalog.hpp"
#include "ctindex/ingest/series.hpp"
#include "ctindex/scheduler/task_queue.hpp"
#include "ctindex/scheduler/worker_pool.hpp"
#include "ctindex/search/index.hpp"
#include "ctindex/service/config.hpp"
#include "ctindex/termmap/mapping.hpp"

namespace ctindex::service {

/// Everything kept per indexed series: the descriptor (for FHIR), the
/// segmenter that produced the statistics and the annotation set.
struct SeriesRecord {
    ingest::SeriesDescriptor series;
    std::string segmenter_name;
    std::string segmenter_version;
    annotate::AnnotationSet annotations;

    friend bool operator==(const SeriesRecord&, const SeriesRecord&) = default;
};

std::string serialize_record(const SeriesRecord& record);
/// Errors: malformed_file, schema_violation.
SeriesRecord parse_record(std::string_view text);

/// File-name-safe stem for a series uid (bytes outside [A-Za-z0-9._-]
/// are percent-encoded).
std::string file_stem(std::string_view series_uid);

struct ExportSummary {
    std::size_t series = 0;
    std::size_t bundles = 0;
    std::size_t entries = 0;
    std::vector<std::filesystem::path> files;
};

/// The pipeline wired together: queue, statistics source, annotation,
/// index, record store and FHIR export. State lives under data_dir:
///
///   queue.json            task snapshot
///   index.snapshot        search index
///   records/<uid>.json    SeriesRecord per indexed series
///   last_run.json         most recent throughput report
///
/// All members are thread-safe.
class IndexingService {
public:
    /// Loads catalogs and the mapping table, then any saved state.
    /// Errors: config_invalid, plus load errors of the mapping table.
    explicit IndexingService(ServiceConfig config);

    IndexingService(const IndexingService&) = delete;
    IndexingService& operator=(const IndexingService&) = delete;

    [[nodiscard]] const ServiceConfig& config() const noexcept { return config_; }
    [[nodiscard]] const termmap::MappingTable& mapping() const noexcept { return *mapping_; }
    [[nodiscard]] const ingest::CatalogRegistry& catalogs() const noexcept { return catalogs_; }
    [[nodiscard]] scheduler::TaskQueue& queue() noexcept { return *queue_; }
    [[nodiscard]] const search::SearchIndex& index() const noexcept { return index_; }

    scheduler::IndexTask submit(const ingest::SeriesDescriptor& series, scheduler::Lane lane, Timestamp now);
    scheduler::LegacyEnqueueResult backfill(std::span<const ingest::SeriesDescriptor> batch, Timestamp now);

    /// One attempt for one task: statistics, annotation, record, index.
    /// A series with no mapped structures completes without a document.
    scheduler::TaskOutcome process(const scheduler::IndexTask& task, scheduler::TaskContext& ctx);

    /// Runs the worker pool over the queue, then saves state.
    scheduler::ThroughputReport run(const scheduler::PoolConfig& pool, std::stop_token stop = {});

    search::SearchResult search(const search::Query& q, search::Page page) const;
    [[nodiscard]] std::optional<SeriesRecord> record(std::string_view series_uid) const;
    /// Records sorted by series uid.
    [[nodiscard]] std::vector<SeriesRecord> records() const;

    [[nodiscard]] fhir::DeviceIdentity device_identity(const SeriesRecord& record) const;
    /// Errors: not_found.
    fhir::ResourceSet resources(std::string_view series_uid) const;
    /// Errors: not_found.
    fhir::TransactionBundle bundle(std::string_view series_uid) const;
    /// Writes bundle-NNNNN.fhir-bundle.json (and .ndjson) files of at most
    /// `bundle_size` series each, in series-uid order.
    ExportSummary export_fhir(const std::filesystem::path& out_dir, std::size_t bundle_size, bool ndjson) const;
    /// Writes <uid>.annotations.json for every record.
    std::size_t export_annotations(const std::filesystem::path& out_dir) const;

    [[nodiscard]] termmap::CoverageReport coverage() const;
    [[nodiscard]] std::optional<scheduler::ThroughputReport> last_report() const;
    /// Plain `key value` lines.
    [[nodiscard]] std::string metrics_text() const;

    /// Persists queue and index; records are written as they are produced.
    void save() const;

private:
    ServiceConfig config_;
    ingest::CatalogRegistry catalogs_;
    std::unique_ptr<termmap::MappingTable> mapping_;
    std::unique_ptr<scheduler::TaskQueue> queue_;
    search::SearchIndex index_;

    mutable std::shared_mutex records_mutex_;
    std::map<std::string, SeriesRecord, std::less<>> records_;

    mutable std::mutex report_mutex_;
    std::optional<scheduler::ThroughputReport> last_report_;
    std::size_t last_workers_ = 0;

    mutable std::mutex save_mutex_;

    void load_state();
    ingest::SegmentationStatistics statistics_for(const ingest::SeriesDescriptor& series,
                                                  scheduler::TaskContext& ctx) const;
    void store(SeriesRecord record);
};

/// Writes `content` to a temporary sibling and renames it over `path`.
/// Errors: io_error.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
/// Errors: io_error.
std::string read_file(const std::filesystem::path& path);

}  // namespace ctindex::service
