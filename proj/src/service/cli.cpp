#include "ctindex/service/cli.hpp"

#include <atomic>
#include <csignal>
#include <deque>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <thread>

#include <CLI11.hpp>

#include "ctindex/ingest/manifest.hpp"
#include "ctindex/ingest/synthetic.hpp"
#include "ctindex/search/query.hpp"
#include "ctindex/service/api.hpp"
#include "ctindex/service/http_server.hpp"
#include "ctindex/service/indexing_service.hpp"
#include "ctindex/text.hpp"

namespace ctindex::service {

using nlohmann::json;

int exit_code(Errc code) noexcept {
    switch (code) {
        case Errc::not_found:
        case Errc::unknown_task:
            return kExitNotFound;
        case Errc::duplicate_active_task:
        case Errc::duplicate_series_uid:
        case Errc::invalid_state:
            return kExitConflict;
        case Errc::config_invalid:
            return kExitUsage;
        case Errc::corrupt_snapshot:
            return kExitInternal;
        default:
            return kExitInvalidInput;
    }
}

namespace {

std::atomic<bool> g_shutdown{false};

extern "C" void on_shutdown_signal(int) { g_shutdown.store(true); }

/// A flag that doubles as a config key; only applied when given.
struct Binding {
    std::string key;
    std::string value;
    CLI::Option* option = nullptr;
};

json rejections_json(const std::vector<scheduler::Rejection>& rejections) {
    json out = json::array();
    for (const auto& r : rejections) {
        out.push_back({{"series_uid", r.series_uid}, {"code", std::string(errc_name(r.code))}, {"message", r.message}});
    }
    return out;
}

int enqueue_manifest(IndexingService& service, const std::string& manifest, scheduler::Lane lane,
                     std::ostream& out) {
    const auto series = ingest::load_manifest(manifest);
    const auto now = now_utc();
    scheduler::LegacyEnqueueResult result;
    if (lane == scheduler::Lane::legacy) {
        result = service.backfill(series, now);
    } else {
        for (const auto& s : series) {
            try {
                service.submit(s, lane, now);
                ++result.enqueued;
            } catch (const Error& e) {
                result.rejections.push_back({s.series_uid, e.code(), e.what()});
            }
        }
    }
    service.save();
    out << to_wire(json{{"lane", std::string(scheduler::to_string(lane))},
                        {"enqueued", result.enqueued},
                        {"rejected", rejections_json(result.rejections)}})
        << '\n';
    return result.rejections.empty() ? kExitOk : exit_code(result.rejections.front().code);
}

int serve(IndexingService& service, bool with_workers, std::ostream& out) {
    const ApiRouter router(service);
    HttpServer server(router, service.config().max_body_bytes);
    const int port = server.bind(service.config().listen_host, service.config().listen_port);

    g_shutdown.store(false);
    std::signal(SIGINT, on_shutdown_signal);
    std::signal(SIGTERM, on_shutdown_signal);

    std::jthread workers;
    if (with_workers) {
        workers = std::jthread([&service](std::stop_token stop) {
            auto pool = service.config().pool;
            pool.clock = scheduler::ClockMode::real;
            pool.exit_when_idle = false;
            service.run(pool, stop);
        });
    }
    std::jthread watcher([&server](std::stop_token stop) {
        while (!stop.stop_requested() && !g_shutdown.load()) {
            std::this_thread::sleep_for(std::chrono::milliseconds(100));
        }
        server.stop();
    });

    out << "listening on http://" << service.config().listen_host << ':' << port << std::endl;
    server.serve();
    watcher.request_stop();
    if (workers.joinable()) {
        workers.request_stop();
        service.queue().notify_all();
        workers.join();
    }
    service.save();
    std::signal(SIGINT, SIG_DFL);
    std::signal(SIGTERM, SIG_DFL);
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err, const EnvLookup& env) {
    CLI::App app{"Semantic indexing pipeline for CT imaging series", "ctindex"};
    app.require_subcommand(1);
    app.fallthrough();

    std::deque<Binding> bindings;
    auto bind = [&bindings](CLI::App* scope, const std::string& flag, const std::string& key,
                            const std::string& help) {
        auto& b = bindings.emplace_back();
        b.key = key;
        b.option = scope->add_option(flag, b.value, help);
        return b.option;
    };

    std::string config_file;
    std::vector<std::string> overrides;
    app.add_option("--config", config_file, "JSON config file (also CTINDEX_CONFIG)");
    app.add_option("--set", overrides, "KEY=VALUE config override, repeatable");
    bind(&app, "--data-dir", "data_dir", "State directory");
    bind(&app, "--mapping", "mapping", "Mapping table CSV");
    bind(&app, "--catalogs", "catalogs", "Label catalog directory");
    bind(&app, "--label-set", "label_set", "Segmenter label set (v1_104, v2_117, v2plus_124)");
    bind(&app, "--policy", "policy", "Annotation policy: lenient or strict");

    std::string manifest;
    auto* ingest = app.add_subcommand("ingest", "Enqueue a manifest on the daily lane");
    ingest->add_option("manifest", manifest, "Manifest file")->required();
    auto* backfill = app.add_subcommand("backfill", "Enqueue a manifest on the legacy lane");
    backfill->add_option("manifest", manifest, "Manifest file")->required();

    bool virtual_clock = false;
    double hours = 0.0;
    std::string virtual_start;
    auto* run = app.add_subcommand("run", "Process queued tasks until the queue is idle");
    bind(run, "--workers", "workers", "Worker count");
    bind(run, "--backend", "backend", "Statistics source: mock or files");
    bind(run, "--seed", "seed", "Mock segmenter seed");
    bind(run, "--service-seconds", "mock_service_seconds", "Mock service time per series");
    bind(run, "--max-attempts", "max_attempts", "Attempts before a task is dead");
    run->add_flag("--virtual-clock", virtual_clock, "Simulate time instead of waiting");
    run->add_option("--hours", hours, "Stop starting tasks after this many hours")->check(CLI::NonNegativeNumber);
    run->add_option("--start", virtual_start, "Virtual clock epoch (YYYY-MM-DD)");

    std::string mapping_file;
    auto* mapping = app.add_subcommand("mapping", "Mapping table QA");
    mapping->require_subcommand(1);
    auto* validate = mapping->add_subcommand("validate", "Parse and validate the mapping table");
    validate->add_option("--file", mapping_file, "Table to validate instead of the configured one");
    auto* coverage = mapping->add_subcommand("coverage", "Coverage of the label catalog");

    std::string out_dir;
    bool ndjson = false;
    auto* export_fhir = app.add_subcommand("export-fhir", "Write FHIR transaction bundles");
    export_fhir->add_option("out-dir", out_dir, "Output directory")->required();
    bind(export_fhir, "--bundle-size", "bundle_size", "Series per bundle");
    export_fhir->add_flag("--ndjson", ndjson, "Also write NDJSON files");

    std::string query_text;
    std::size_t offset = 0;
    std::optional<std::size_t> limit;
    auto* query = app.add_subcommand("query", "Search the index");
    query->add_option("query", query_text, "Query text, e.g. and(code:10200004,vol:10200004:[1000000,])")
        ->required();
    query->add_option("--offset", offset, "First hit to return");
    query->add_option("--limit", limit, "Hits per page");

    bool no_workers = false;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API (and workers)");
    bind(serve_cmd, "--listen", "listen", "host:port");
    serve_cmd->add_flag("--no-workers", no_workers, "API only; do not process tasks");

    auto* annotations = app.add_subcommand("annotations", "Annotation set operations");
    annotations->require_subcommand(1);
    auto* annotations_export = annotations->add_subcommand("export", "Write <uid>.annotations.json files");
    annotations_export->add_option("out-dir", out_dir, "Output directory")->required();

    auto* metrics = app.add_subcommand("metrics", "Queue, index and last-run metrics");

    ingest::SynthOptions synth;
    std::string synth_start;
    std::string synth_source = "daily";
    bool no_hints = false;
    std::string synth_output;
    auto* synth_cmd = app.add_subcommand("synth-manifest", "Write a deterministic synthetic manifest");
    synth_cmd->add_option("--count", synth.count, "Series count");
    synth_cmd->add_option("--seed", synth.seed, "Generator seed");
    synth_cmd->add_option("--patients", synth.patients, "Distinct patients (0: one per series)");
    synth_cmd->add_option("--start", synth_start, "First acquisition date (YYYY-MM-DD)");
    synth_cmd->add_option("--days", synth.days, "Date range length in days");
    synth_cmd->add_option("--source", synth_source, "daily or legacy");
    synth_cmd->add_flag("--no-hints", no_hints, "Omit body-region hints");
    synth_cmd->add_option("-o,--output", synth_output, "Write to file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (synth_cmd->parsed()) {
            if (!synth_start.empty()) {
                auto d = parse_iso_date(synth_start);
                if (!d) {
                    throw Error(Errc::invalid_argument, "--start must be YYYY-MM-DD");
                }
                synth.first_date = *d;
            }
            auto source = ingest::parse_source(synth_source);
            if (!source) {
                throw Error(Errc::invalid_argument, "--source must be daily or legacy");
            }
            synth.source = *source;
            synth.with_hints = !no_hints;
            const auto text = ingest::format_manifest(ingest::synthesize_series(synth));
            if (synth_output.empty()) {
                out << text;
            } else {
                write_file_atomic(synth_output, text);
            }
            return kExitOk;
        }

        ServiceConfig config = ServiceConfig::defaults();
        if (config_file.empty()) {
            config_file = env("CTINDEX_CONFIG").value_or("");
        }
        if (!config_file.empty()) {
            apply_config_file(config, config_file);
        }
        apply_environment(config, env);
        for (const auto& b : bindings) {
            if (b.option->count() > 0) {
                set_option(config, b.key, b.value);
            }
        }
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) {
                throw Error(Errc::config_invalid, "--set expects KEY=VALUE, got '" + kv + "'");
            }
            set_option(config, kv.substr(0, eq), kv.substr(eq + 1));
        }

        if (mapping->parsed()) {
            const auto catalogs = ingest::CatalogRegistry::load_directory(config.catalog_dir);
            const auto table =
                termmap::load_mapping(mapping_file.empty() ? config.mapping_path : std::filesystem::path(mapping_file), catalogs);
            if (validate->parsed()) {
                out << json{{"valid", true},
                            {"map_version", table.map_version()},
                            {"label_set", std::string(ingest::to_string(table.target_label_set_id()))},
                            {"entries", table.size()}}
                           .dump()
                    << '\n';
            } else if (coverage->parsed()) {
                const auto report =
                    termmap::coverage_report(table, catalogs.get(table.target_label_set_id()));
                out << coverage_json(report).dump() << '\n';
            }
            return kExitOk;
        }

        IndexingService service(config);

        if (ingest->parsed()) {
            return enqueue_manifest(service, manifest, scheduler::Lane::daily, out);
        }
        if (backfill->parsed()) {
            return enqueue_manifest(service, manifest, scheduler::Lane::legacy, out);
        }
        if (run->parsed()) {
            auto pool = config.pool;
            pool.clock = virtual_clock ? scheduler::ClockMode::virtual_clock : scheduler::ClockMode::real;
            pool.exit_when_idle = true;
            if (hours > 0.0) {
                pool.time_limit = std::chrono::milliseconds(static_cast<std::int64_t>(hours * 3'600'000.0));
            }
            if (!virtual_start.empty()) {
                auto d = parse_iso_date(virtual_start);
                if (!d) {
                    throw Error(Errc::invalid_argument, "--start must be YYYY-MM-DD");
                }
                pool.virtual_start = Timestamp{std::chrono::sys_days{*d}};
            }
            service.run(pool);
            out << service.metrics_text();
            return kExitOk;
        }
        if (export_fhir->parsed()) {
            const auto summary = service.export_fhir(out_dir, config.bundle_size, ndjson);
            json files = json::array();
            for (const auto& f : summary.files) {
                files.push_back(f.string());
            }
            out << json{{"series", summary.series},
                        {"bundles", summary.bundles},
                        {"entries", summary.entries},
                        {"files", files}}
                       .dump()
                << '\n';
            return kExitOk;
        }
        if (query->parsed()) {
            const auto q = search::parse_query(query_text);
            search::Page page{offset, limit.value_or(config.default_page_limit)};
            if (page.limit > config.max_page_limit) {
                throw Error(Errc::invalid_argument,
                            "limit exceeds the maximum of " + std::to_string(config.max_page_limit));
            }
            out << to_wire(search_response(q, service.search(q, page), page)) << '\n';
            return kExitOk;
        }
        if (serve_cmd->parsed()) {
            return serve(service, !no_workers, out);
        }
        if (annotations_export->parsed()) {
            const auto n = service.export_annotations(out_dir);
            out << json{{"exported", n}}.dump() << '\n';
            return kExitOk;
        }
        if (metrics->parsed()) {
            out << service.metrics_text();
            return kExitOk;
        }
        err << "error: no command\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << errc_name(e.code()) << ": " << e.what();
        if (e.location()) {
            err << " (line " << *e.location() << ")";
        }
        err << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        err << "error: internal: " << e.what() << '\n';
        return kExitInternal;
    }
}

}  // namespace ctindex::service
