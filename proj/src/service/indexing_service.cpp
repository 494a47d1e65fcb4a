#include "ctindex/service/indexing_service.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "ctindex/error.hpp"
#include "ctindex/ingest/mock_segmenter.hpp"
#include "ctindex/ingest/statistics.hpp"
#include "ctindex/scheduler/transport.hpp"
#include "ctindex/text.hpp"

namespace ctindex::service {

using nlohmann::json;
namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, std::string_view content) {
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(Errc::io_error, "cannot write " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw Error(Errc::io_error, "short write to " + tmp.string());
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        throw Error(Errc::io_error, "cannot move " + tmp.string() + " into place: " + ec.message());
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::io_error, "cannot read " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string file_stem(std::string_view series_uid) {
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : series_uid) {
        if (std::isalnum(c) != 0 || c == '.' || c == '_' || c == '-') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(kHex[c >> 4]);
            out.push_back(kHex[c & 0xF]);
        }
    }
    // "." and ".." are not usable file names.
    if (out.find_first_not_of('.') == std::string::npos) {
        std::string encoded;
        for (std::size_t i = 0; i < out.size(); ++i) {
            encoded += "%2E";
        }
        return encoded;
    }
    return out;
}

std::string serialize_record(const SeriesRecord& r) {
    json j{{"series", scheduler::series_to_json(r.series)},
           {"segmenter", {{"name", r.segmenter_name}, {"version", r.segmenter_version}}},
           {"annotations", json::parse(annotate::serialize_annotation_set(r.annotations))}};
    return j.dump(2) + "\n";
}

SeriesRecord parse_record(std::string_view text) {
    json j;
    try {
        j = json::parse(text.begin(), text.end());
    } catch (const json::exception& e) {
        throw Error(Errc::malformed_file, std::string("record is not valid JSON: ") + e.what());
    }
    try {
        if (!j.is_object() || !j.contains("series") || !j.contains("segmenter") || !j.contains("annotations")) {
            throw Error(Errc::schema_violation, "record needs series, segmenter and annotations");
        }
        SeriesRecord r;
        r.series = scheduler::series_from_json(j.at("series"));
        r.segmenter_name = j.at("segmenter").at("name").get<std::string>();
        r.segmenter_version = j.at("segmenter").at("version").get<std::string>();
        r.annotations = annotate::parse_annotation_set(j.at("annotations").dump());
        if (r.annotations.series_uid != r.series.series_uid) {
            throw Error(Errc::schema_violation, "record annotations belong to another series");
        }
        return r;
    } catch (const json::exception& e) {
        throw Error(Errc::schema_violation, std::string("record field has wrong type: ") + e.what());
    }
}

namespace {

json report_to_json(const scheduler::ThroughputReport& r, std::size_t workers) {
    json busy = json::array();
    for (auto b : r.busy_time_per_worker) {
        busy.push_back(b.count());
    }
    return json{{"workers", workers},
                {"window_start", format_timestamp(r.window_start)},
                {"window_end", format_timestamp(r.window_end)},
                {"completed", r.completed},
                {"failed", r.failed},
                {"dead", r.dead},
                {"busy_ms_per_worker", busy}};
}

scheduler::ThroughputReport report_from_json(const json& j) {
    scheduler::ThroughputReport r;
    const auto start = parse_timestamp(j.at("window_start").get<std::string>());
    const auto end = parse_timestamp(j.at("window_end").get<std::string>());
    if (!start || !end) {
        throw Error(Errc::schema_violation, "bad timestamps in last_run.json");
    }
    r.window_start = *start;
    r.window_end = *end;
    r.completed = j.at("completed").get<std::size_t>();
    r.failed = j.at("failed").get<std::size_t>();
    r.dead = j.at("dead").get<std::size_t>();
    for (const auto& b : j.at("busy_ms_per_worker")) {
        r.busy_time_per_worker.emplace_back(b.get<std::int64_t>());
        r.total_busy_time += r.busy_time_per_worker.back();
    }
    const double hours = r.window_hours();
    r.series_per_hour = hours > 0.0 ? static_cast<double>(r.completed) / hours : 0.0;
    return r;
}

}  // namespace

IndexingService::IndexingService(ServiceConfig config) : config_(std::move(config)) {
    validate_config(config_);
    catalogs_ = ingest::CatalogRegistry::load_directory(config_.catalog_dir);
    if (!catalogs_.has(config_.label_set_id)) {
        throw Error(Errc::config_invalid, "no catalog for label set " +
                                              std::string(ingest::to_string(config_.label_set_id)) + " in " +
                                              config_.catalog_dir.string());
    }
    mapping_ = std::make_unique<termmap::MappingTable>(termmap::load_mapping(config_.mapping_path, catalogs_));
    if (mapping_->target_label_set_id() != config_.label_set_id) {
        throw Error(Errc::config_invalid, "mapping table targets " +
                                              std::string(ingest::to_string(mapping_->target_label_set_id())) +
                                              " but label_set is " +
                                              std::string(ingest::to_string(config_.label_set_id)));
    }
    scheduler::QueueOptions options;
    options.legacy_order = config_.legacy_order;
    options.retry.max_attempts = config_.pool.max_attempts;
    options.retry.backoff = config_.pool.retry_backoff;
    queue_ = std::make_unique<scheduler::TaskQueue>(options);
    load_state();
}

void IndexingService::load_state() {
    const fs::path dir = config_.data_dir;
    std::error_code ec;
    fs::create_directories(dir / "records", ec);
    if (ec) {
        throw Error(Errc::io_error, "cannot create data directory " + dir.string() + ": " + ec.message());
    }

    for (const auto& entry : fs::directory_iterator(dir / "records")) {
        if (entry.path().extension() != ".json") {
            continue;
        }
        auto r = parse_record(read_file(entry.path()));
        records_.insert_or_assign(r.series.series_uid, std::move(r));
    }

    if (fs::exists(dir / "index.snapshot")) {
        index_ = search::SearchIndex::restore(dir / "index.snapshot");
    }
    // Records are written before the index commit, so a crash in between
    // leaves a record the snapshot lacks.
    for (const auto& [uid, r] : records_) {
        if (!index_.get(uid)) {
            index_.index_document(search::make_index_document(r.annotations, r.series));
        }
    }

    if (fs::exists(dir / "queue.json")) {
        json j;
        try {
            j = json::parse(read_file(dir / "queue.json"));
        } catch (const json::exception& e) {
            throw Error(Errc::malformed_file, std::string("queue.json is not valid JSON: ") + e.what());
        }
        std::vector<scheduler::IndexTask> tasks;
        for (const auto& t : j.value("tasks", json::array())) {
            tasks.push_back(scheduler::decode_task_json(t.dump()));
        }
        queue_->restore(std::move(tasks), now_utc());
    }

    if (fs::exists(dir / "last_run.json")) {
        try {
            const auto j = json::parse(read_file(dir / "last_run.json"));
            last_report_ = report_from_json(j);
            last_workers_ = j.value("workers", std::size_t{0});
        } catch (const json::exception& e) {
            throw Error(Errc::malformed_file, std::string("last_run.json is unreadable: ") + e.what());
        }
    }
}

void IndexingService::save() const {
    std::lock_guard lock(save_mutex_);
    json tasks = json::array();
    for (const auto& t : queue_->snapshot()) {
        tasks.push_back(json::parse(scheduler::encode_task_json(t)));
    }
    write_file_atomic(config_.data_dir / "queue.json", json{{"tasks", tasks}}.dump(2) + "\n");
    index_.persist(config_.data_dir / "index.snapshot");
    std::lock_guard report_lock(report_mutex_);
    if (last_report_) {
        write_file_atomic(config_.data_dir / "last_run.json",
                          report_to_json(*last_report_, last_workers_).dump(2) + "\n");
    }
}

scheduler::IndexTask IndexingService::submit(const ingest::SeriesDescriptor& series, scheduler::Lane lane,
                                             Timestamp now) {
    return queue_->enqueue(series, lane, now);
}

scheduler::LegacyEnqueueResult IndexingService::backfill(std::span<const ingest::SeriesDescriptor> batch,
                                                         Timestamp now) {
    return queue_->enqueue_legacy(batch, now);
}

ingest::SegmentationStatistics IndexingService::statistics_for(const ingest::SeriesDescriptor& series,
                                                               scheduler::TaskContext& ctx) const {
    if (config_.backend == Backend::mock) {
        ingest::MockCalibration calibration;
        calibration.label_set_id = config_.label_set_id;
        calibration.mean_structures = config_.mock_mean_structures;
        calibration.region_model = ingest::RegionModel::hint;
        ctx.service_time = config_.mock_service_time;
        return ingest::mock_segment(series, config_.seed, calibration, catalogs_.get(config_.label_set_id));
    }
    const fs::path file =
        config_.effective_stats_dir() / (file_stem(series.series_uid) + std::string(ingest::kStatisticsExtension));
    return ingest::parse_statistics(read_file(file), series, catalogs_);
}

scheduler::TaskOutcome IndexingService::process(const scheduler::IndexTask& task, scheduler::TaskContext& ctx) {
    const auto stats = statistics_for(task.series, ctx);
    annotate::AnnotationContext context{std::string(kIndexerVersion), ctx.started_at};
    auto set = annotate::annotate(stats, *mapping_, config_.policy, context);
    if (set.annotations.empty()) {
        return scheduler::TaskOutcome::ok();
    }
    store(SeriesRecord{task.series, stats.segmenter_name, stats.segmenter_version, std::move(set)});
    return scheduler::TaskOutcome::ok();
}

void IndexingService::store(SeriesRecord record) {
    auto doc = search::make_index_document(record.annotations, record.series);
    write_file_atomic(config_.data_dir / "records" / (file_stem(record.series.series_uid) + ".json"),
                      serialize_record(record));
    {
        std::unique_lock lock(records_mutex_);
        records_.insert_or_assign(record.series.series_uid, std::move(record));
    }
    index_.index_document(std::move(doc));
}

scheduler::ThroughputReport IndexingService::run(const scheduler::PoolConfig& pool, std::stop_token stop) {
    auto report = scheduler::run_pool(
        *queue_, pool, [this](const scheduler::IndexTask& t, scheduler::TaskContext& ctx) { return process(t, ctx); },
        stop);
    {
        std::lock_guard lock(report_mutex_);
        last_report_ = report;
        last_workers_ = pool.worker_count;
    }
    save();
    return report;
}

search::SearchResult IndexingService::search(const search::Query& q, search::Page page) const {
    return index_.search(q, page);
}

std::optional<SeriesRecord> IndexingService::record(std::string_view series_uid) const {
    std::shared_lock lock(records_mutex_);
    if (auto it = records_.find(series_uid); it != records_.end()) {
        return it->second;
    }
    return std::nullopt;
}

std::vector<SeriesRecord> IndexingService::records() const {
    std::shared_lock lock(records_mutex_);
    std::vector<SeriesRecord> out;
    out.reserve(records_.size());
    for (const auto& [uid, r] : records_) {
        out.push_back(r);
    }
    return out;
}

fhir::DeviceIdentity IndexingService::device_identity(const SeriesRecord& r) const {
    return fhir::DeviceIdentity{std::string(kIndexerName), r.annotations.indexer_version, r.segmenter_name,
                                r.segmenter_version, r.annotations.mapping_version};
}

fhir::ResourceSet IndexingService::resources(std::string_view series_uid) const {
    auto r = record(series_uid);
    if (!r) {
        throw Error(Errc::not_found, "series '" + std::string(series_uid) + "' is not indexed");
    }
    return fhir::build_resources(r->annotations, r->series, device_identity(*r));
}

fhir::TransactionBundle IndexingService::bundle(std::string_view series_uid) const {
    const auto set = resources(series_uid);
    return fhir::to_transaction_bundle(std::span(&set, 1));
}

ExportSummary IndexingService::export_fhir(const fs::path& out_dir, std::size_t bundle_size, bool ndjson) const {
    if (bundle_size == 0) {
        throw Error(Errc::invalid_argument, "bundle size must be at least 1");
    }
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        throw Error(Errc::io_error, "cannot create " + out_dir.string() + ": " + ec.message());
    }
    const auto all = records();
    ExportSummary summary;
    summary.series = all.size();
    for (std::size_t begin = 0; begin < all.size(); begin += bundle_size) {
        const std::size_t end = std::min(all.size(), begin + bundle_size);
        std::vector<fhir::ResourceSet> sets;
        sets.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            sets.push_back(fhir::build_resources(all[i].annotations, all[i].series, device_identity(all[i])));
        }
        const auto bundle = fhir::to_transaction_bundle(sets);
        char name[32];
        std::snprintf(name, sizeof name, "bundle-%05zu", summary.bundles + 1);
        const fs::path base = out_dir / name;
        auto path = base;
        path += std::string(fhir::kBundleExtension);
        write_file_atomic(path, fhir::serialize_bundle(bundle));
        summary.files.push_back(path);
        if (ndjson) {
            auto nd = base;
            nd += ".ndjson";
            write_file_atomic(nd, fhir::to_ndjson(bundle));
            summary.files.push_back(nd);
        }
        ++summary.bundles;
        summary.entries += bundle.entries.size();
    }
    return summary;
}

std::size_t IndexingService::export_annotations(const fs::path& out_dir) const {
    const auto all = records();
    for (const auto& r : all) {
        write_file_atomic(out_dir / (file_stem(r.series.series_uid) + std::string(annotate::kAnnotationExtension)),
                          annotate::serialize_annotation_set(r.annotations));
    }
    return all.size();
}

termmap::CoverageReport IndexingService::coverage() const {
    return termmap::coverage_report(*mapping_, catalogs_.get(mapping_->target_label_set_id()));
}

std::optional<scheduler::ThroughputReport> IndexingService::last_report() const {
    std::lock_guard lock(report_mutex_);
    return last_report_;
}

std::string IndexingService::metrics_text() const {
    std::ostringstream out;
    const auto c = queue_->counts();
    out << "queue_total_enqueued " << c.total_enqueued << '\n'
        << "queue_queued " << c.queued << '\n'
        << "queue_queued_daily " << c.queued_daily << '\n'
        << "queue_queued_legacy " << c.queued_legacy << '\n'
        << "queue_running " << c.running << '\n'
        << "queue_done " << c.done << '\n'
        << "queue_dead " << c.dead << '\n'
        << "index_documents " << index_.size() << '\n';
    std::lock_guard lock(report_mutex_);
    if (last_report_) {
        const auto& r = *last_report_;
        out << "run_workers " << last_workers_ << '\n'
            << "run_window_start " << format_timestamp(r.window_start) << '\n'
            << "run_window_end " << format_timestamp(r.window_end) << '\n'
            << "run_window_hours " << format_double(r.window_hours()) << '\n'
            << "run_completed " << r.completed << '\n'
            << "run_failed_attempts " << r.failed << '\n'
            << "run_dead " << r.dead << '\n'
            << "run_series_per_hour " << format_double(r.series_per_hour) << '\n'
            << "run_busy_seconds " << format_double(static_cast<double>(r.total_busy_time.count()) / 1000.0)
            << '\n';
    }
    return out.str();
}

}  // namespace ctindex::service
