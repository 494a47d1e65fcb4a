#include <gtest/gtest.h>

#include <httplib.h>

#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "../support/fixtures.hpp"
#include "ctindex/error.hpp"
#include "ctindex/ingest/manifest.hpp"
#include "ctindex/ingest/mock_segmenter.hpp"
#include "ctindex/ingest/synthetic.hpp"
#include "ctindex/scheduler/transport.hpp"
#include "ctindex/service/api.hpp"
#include "ctindex/service/cli.hpp"
#include "ctindex/service/config.hpp"
#include "ctindex/service/http_server.hpp"
#include "ctindex/service/indexing_service.hpp"

namespace ctindex::service {
namespace {

using namespace std::chrono_literals;
using nlohmann::json;
using testing::make_series;
using testing::TempDir;

const Timestamp kT0 = *parse_timestamp("2024-03-01T08:00:00Z");

Errc error_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return Errc::invalid_argument;
}

EnvLookup env_of(std::map<std::string, std::string> vars) {
    return [vars = std::move(vars)](const std::string& name) -> std::optional<std::string> {
        const auto it = vars.find(name);
        return it == vars.end() ? std::nullopt : std::optional<std::string>(it->second);
    };
}

ServiceConfig config_in(const TempDir& dir) {
    auto c = ServiceConfig::defaults();
    c.data_dir = dir.path() / "data";
    return c;
}

scheduler::PoolConfig virtual_pool() {
    scheduler::PoolConfig p;
    p.worker_count = 8;
    p.clock = scheduler::ClockMode::virtual_clock;
    return p;
}

std::vector<ingest::SeriesDescriptor> synth(std::size_t n, std::uint64_t seed = 1) {
    ingest::SynthOptions o;
    o.count = n;
    o.seed = seed;
    o.patients = n / 3 + 1;
    return ingest::synthesize_series(o);
}

// ---- config ----

TEST(ServiceConfigTest, DefaultsAreValid) {
    const auto c = ServiceConfig::defaults();
    EXPECT_NO_THROW(validate_config(c));
    EXPECT_TRUE(std::filesystem::exists(c.mapping_path));
    EXPECT_EQ(c.effective_stats_dir(), c.data_dir / "stats");
}

TEST(ServiceConfigTest, SetOption) {
    auto c = ServiceConfig::defaults();
    set_option(c, "listen", "0.0.0.0:9090");
    EXPECT_EQ(c.listen_host, "0.0.0.0");
    EXPECT_EQ(c.listen_port, 9090);
    set_option(c, "workers", "3");
    EXPECT_EQ(c.pool.worker_count, 3u);
    set_option(c, "retry_backoff_ms", "100,2000");
    EXPECT_EQ(c.pool.retry_backoff, (std::vector<std::chrono::milliseconds>{100ms, 2000ms}));
    set_option(c, "policy", "strict");
    EXPECT_EQ(c.policy.mode, annotate::PolicyMode::strict);
    set_option(c, "mock_service_seconds", "1.5");
    EXPECT_EQ(c.mock_service_time, 1500ms);
    set_option(c, "legacy_order", "newest_first");
    EXPECT_EQ(c.legacy_order, scheduler::LegacyOrder::newest_first);
    set_option(c, "backend", "files");
    EXPECT_EQ(c.backend, Backend::files);
    set_option(c, "auth_token", "s3cret");
    EXPECT_EQ(c.auth_token, std::optional<std::string>("s3cret"));
    for (const auto& [k, v] : std::vector<std::pair<std::string, std::string>>{
             {"nope", "1"}, {"workers", "x"}, {"workers", "-1"}, {"listen", "host"}, {"listen", "h:99999"},
             {"policy", "loose"}, {"backend", "cloud"}, {"min_volume_mm3", "abc"}, {"seed", "1.5"}}) {
        EXPECT_EQ(error_of([&] { set_option(c, k, v); }), Errc::config_invalid) << k << "=" << v;
    }
}

TEST(ServiceConfigTest, PrecedenceFlagsOverEnvOverFile) {
    TempDir dir("config");
    const auto file = dir.path() / "ctindex.json";
    std::ofstream(file) << R"({"workers": 2, "bundle_size": 7, "seed": 5})";
    std::ostringstream out, err;
    const auto manifest = dir.path() / "m.txt";
    std::ofstream(manifest) << ingest::format_manifest(synth(1));
    const auto data = (dir.path() / "data").string();
    const char* argv[] = {"ctindex", "--config", file.c_str(), "--set", "workers=4", "--data-dir", data.c_str(),
                          "ingest", manifest.c_str()};
    EXPECT_EQ(run_cli(9, argv, out, err, env_of({{"CTINDEX_WORKERS", "3"}, {"CTINDEX_BUNDLE_SIZE", "9"}})), 0)
        << err.str();

    auto c = ServiceConfig::defaults();
    apply_config_file(c, file);
    EXPECT_EQ(c.pool.worker_count, 2u);
    apply_environment(c, env_of({{"CTINDEX_WORKERS", "3"}}));
    EXPECT_EQ(c.pool.worker_count, 3u);
    EXPECT_EQ(c.bundle_size, 7u);
    EXPECT_EQ(c.seed, 5u);

    std::ofstream(file) << R"({"workers": "many"})";
    EXPECT_EQ(error_of([&] { apply_config_file(c, file); }), Errc::config_invalid);
    std::ofstream(file) << R"([1])";
    EXPECT_EQ(error_of([&] { apply_config_file(c, file); }), Errc::config_invalid);
    EXPECT_EQ(error_of([&] { apply_config_file(c, dir.path() / "missing.json"); }), Errc::io_error);
}

TEST(ServiceConfigTest, ValidateRejectsBadCombinations) {
    auto c = ServiceConfig::defaults();
    c.pool.worker_count = 0;
    EXPECT_EQ(error_of([&] { validate_config(c); }), Errc::config_invalid);
    c = ServiceConfig::defaults();
    c.default_page_limit = c.max_page_limit + 1;
    EXPECT_EQ(error_of([&] { validate_config(c); }), Errc::config_invalid);
    c = ServiceConfig::defaults();
    c.mapping_path = "/nonexistent/mapping.csv";
    EXPECT_EQ(error_of([&] { validate_config(c); }), Errc::config_invalid);
    c = ServiceConfig::defaults();
    c.label_set_id = ingest::LabelSetId::v2_117;
    EXPECT_EQ(error_of([&] { IndexingService s(c); }), Errc::config_invalid);
}

// ---- indexing service ----

TEST(IndexingServiceTest, FileStem) {
    EXPECT_EQ(file_stem("1.2.840.113619"), "1.2.840.113619");
    EXPECT_EQ(file_stem("a/b c"), "a%2Fb%20c");
    EXPECT_EQ(file_stem(".."), "%2E%2E");
}

TEST(IndexingServiceTest, RecordRoundTrip) {
    TempDir dir("record");
    IndexingService service(config_in(dir));
    service.submit(make_series("1.2.3"), scheduler::Lane::daily, kT0);
    service.run(virtual_pool());
    const auto r = service.record("1.2.3");
    ASSERT_TRUE(r);
    EXPECT_EQ(parse_record(serialize_record(*r)), *r);
    EXPECT_EQ(error_of([] { parse_record("{}"); }), Errc::schema_violation);
    EXPECT_EQ(error_of([] { parse_record("nope"); }), Errc::malformed_file);
}

TEST(IndexingServiceTest, RunIndexesAndExports) {
    TempDir dir("service");
    const auto series = synth(30);
    {
        IndexingService service(config_in(dir));
        EXPECT_EQ(service.backfill(series, kT0).enqueued, 30u);
        const auto report = service.run(virtual_pool());
        EXPECT_EQ(report.completed, 30u);
        EXPECT_EQ(service.index().size(), 30u);
        EXPECT_EQ(service.records().size(), 30u);

        const auto set = service.resources(series[0].series_uid);
        EXPECT_EQ(set.body_structure.body.at("includedStructure").size(),
                  service.record(series[0].series_uid)->annotations.annotations.size());
        EXPECT_EQ(error_of([&] { service.resources("missing"); }), Errc::not_found);

        const auto summary = service.export_fhir(dir.path() / "fhir", 12, true);
        EXPECT_EQ(summary.series, 30u);
        EXPECT_EQ(summary.bundles, 3u);
        std::set<std::string> patients;
        for (const auto& s : series) {
            patients.insert(s.patient_pseudonym);
        }
        // Devices and patients are deduplicated per bundle file.
        std::size_t entries = 0;
        for (const auto& f : summary.files) {
            if (f.extension() == ".json") {
                entries += fhir::parse_bundle(read_file(f)).entries.size();
            }
        }
        EXPECT_EQ(entries, summary.entries);
        EXPECT_GE(entries, 90u + patients.size() + 1u);
        EXPECT_EQ(service.export_annotations(dir.path() / "ann"), 30u);
        EXPECT_NE(service.metrics_text().find("queue_done 30\n"), std::string::npos);
        EXPECT_NE(service.metrics_text().find("index_documents 30\n"), std::string::npos);
    }
    // A fresh instance sees the saved state.
    IndexingService reloaded(config_in(dir));
    EXPECT_EQ(reloaded.index().size(), 30u);
    EXPECT_EQ(reloaded.queue().counts().done, 30u);
    EXPECT_EQ(reloaded.records().size(), 30u);
    EXPECT_TRUE(reloaded.last_report());
    // Only active tasks block a resubmission.
    EXPECT_EQ(reloaded.submit(series[0], scheduler::Lane::daily, kT0).state, scheduler::TaskState::queued);
}

TEST(IndexingServiceTest, MissingSnapshotIsRebuiltFromRecords) {
    TempDir dir("rebuild");
    {
        IndexingService service(config_in(dir));
        service.backfill(synth(10), kT0);
        service.run(virtual_pool());
    }
    std::filesystem::remove(dir.path() / "data" / "index.snapshot");
    IndexingService reloaded(config_in(dir));
    EXPECT_EQ(reloaded.index().size(), 10u);
}

TEST(IndexingServiceTest, FilesBackend) {
    TempDir dir("files");
    auto c = config_in(dir);
    c.backend = Backend::files;
    const auto series = synth(4);
    std::filesystem::create_directories(c.effective_stats_dir());
    for (std::size_t i = 0; i < 3; ++i) {
        const auto stats = ingest::mock_segment(series[i], 9, {}, testing::catalogs().get(ingest::LabelSetId::v1_104));
        std::ofstream(c.effective_stats_dir() / (file_stem(series[i].series_uid) + ".segstats.json"))
            << ingest::serialize_statistics(stats);
    }
    IndexingService service(c);
    service.backfill(series, kT0);
    auto pool = virtual_pool();
    pool.max_attempts = 2;
    const auto report = service.run(pool);
    EXPECT_EQ(report.completed, 3u);
    EXPECT_EQ(report.dead, 1u);
    const auto dead = service.queue().snapshot();
    const auto it = std::find_if(dead.begin(), dead.end(), [](const auto& t) { return t.state == scheduler::TaskState::dead; });
    ASSERT_NE(it, dead.end());
    EXPECT_EQ(it->series.series_uid, series[3].series_uid);
    EXPECT_EQ(it->attempts, 2u);
}

// ---- router ----

class RouterTest : public ::testing::Test {
protected:
    TempDir dir{"router"};
    std::unique_ptr<IndexingService> service;
    std::unique_ptr<ApiRouter> router;

    void SetUp() override { reset(config_in(dir)); }

    void reset(ServiceConfig c) {
        router.reset();
        service.reset();
        service = std::make_unique<IndexingService>(std::move(c));
        router = std::make_unique<ApiRouter>(*service, [] { return kT0; });
    }

    ApiResponse call(std::string method, std::string path, std::map<std::string, std::string> query = {},
                     std::string body = {}, std::map<std::string, std::string> headers = {}) const {
        return router->handle({std::move(method), std::move(path), std::move(query), std::move(headers), std::move(body)});
    }

    static std::string task_body(const ingest::SeriesDescriptor& s, std::string lane = "daily") {
        return json{{"series", scheduler::series_to_json(s)}, {"lane", lane}}.dump();
    }

    static std::string error_code(const ApiResponse& r) { return json::parse(r.body).at("error").at("code"); }
};

TEST_F(RouterTest, TaskLifecycle) {
    const auto series = make_series("1.2.3");
    auto r = call("POST", "/tasks", {}, task_body(series));
    ASSERT_EQ(r.status, 202) << r.body;
    const auto id = json::parse(r.body).at("task_id").get<std::string>();
    EXPECT_EQ(json::parse(r.body).at("state"), "queued");

    r = call("POST", "/tasks", {}, task_body(series));
    EXPECT_EQ(r.status, 409);
    EXPECT_EQ(error_code(r), "duplicate_active_task");

    EXPECT_EQ(json::parse(call("GET", "/tasks/" + id).body).at("state"), "queued");
    service->run(virtual_pool());
    r = call("GET", "/tasks/" + id);
    EXPECT_EQ(r.status, 200);
    const auto task = json::parse(r.body);
    EXPECT_EQ(task.at("state"), "done");
    EXPECT_EQ(task.at("attempts"), 1);

    r = call("GET", "/search", {{"q", "all"}});
    EXPECT_EQ(json::parse(r.body).at("hits"), json::array({"1.2.3"}));
    r = call("GET", "/series/1.2.3/annotations");
    EXPECT_EQ(r.status, 200);
    EXPECT_EQ(annotate::parse_annotation_set(r.body), service->record("1.2.3")->annotations);
    r = call("GET", "/series/1.2.3/fhir");
    EXPECT_EQ(r.status, 200);
    EXPECT_EQ(r.content_type, "application/fhir+json");
    EXPECT_EQ(fhir::parse_bundle(r.body).entries.size(), 5u);
    r = call("GET", "/metrics");
    EXPECT_EQ(r.content_type.rfind("text/plain", 0), 0u);
    EXPECT_NE(r.body.find("queue_done 1\n"), std::string::npos);
}

TEST_F(RouterTest, Rejections) {
    auto mr = make_series("9.9");
    mr.modality = ingest::Modality::MR;
    auto r = call("POST", "/tasks", {}, task_body(mr));
    EXPECT_EQ(r.status, 400);
    EXPECT_EQ(error_code(r), "rejected_modality");
    EXPECT_EQ(error_code(call("POST", "/tasks", {}, "{")), "malformed_file");
    EXPECT_EQ(call("POST", "/tasks", {}, R"({"lane":"daily"})").status, 400);
    EXPECT_EQ(call("POST", "/tasks", {}, task_body(make_series("1"), "urgent")).status, 400);
}

TEST_F(RouterTest, NotFoundAndMethodErrors) {
    auto r = call("GET", "/tasks/task-00000042");
    EXPECT_EQ(r.status, 404);
    EXPECT_EQ(error_code(r), "unknown_task");
    EXPECT_EQ(call("GET", "/series/nope/annotations").status, 404);
    r = call("GET", "/series/nope/fhir");
    EXPECT_EQ(r.status, 404);
    EXPECT_EQ(error_code(r), "not_found");
    EXPECT_EQ(call("GET", "/nowhere").status, 404);
    EXPECT_EQ(call("DELETE", "/tasks").status, 405);
    EXPECT_EQ(call("GET", "/tasks").status, 405);
    EXPECT_EQ(call("POST", "/search").status, 405);
    EXPECT_EQ(error_code(call("PUT", "/metrics")), "method_not_allowed");
}

TEST_F(RouterTest, SearchParameters) {
    service->backfill(synth(20), kT0);
    service->run(virtual_pool());
    auto r = call("GET", "/search", {{"q", "all"}, {"offset", "5"}, {"limit", "3"}});
    ASSERT_EQ(r.status, 200);
    auto j = json::parse(r.body);
    EXPECT_EQ(j.at("total"), 20);
    EXPECT_EQ(j.at("offset"), 5);
    EXPECT_EQ(j.at("limit"), 3);
    EXPECT_EQ(j.at("hits").size(), 3u);
    EXPECT_EQ(j.at("query"), "all");

    r = call("GET", "/search", {{"q", "and(code:10200004,not(code:10200004))"}});
    EXPECT_EQ(json::parse(r.body).at("total"), 0);
    EXPECT_EQ(json::parse(call("GET", "/search", {{"q", "all"}}).body).at("limit"), 50);

    EXPECT_EQ(error_code(call("GET", "/search")), "malformed_query");
    EXPECT_EQ(error_code(call("GET", "/search", {{"q", "and("}})), "malformed_query");
    EXPECT_EQ(call("GET", "/search", {{"q", "all"}, {"limit", "1001"}}).status, 400);
    EXPECT_EQ(call("GET", "/search", {{"q", "all"}, {"limit", "-1"}}).status, 400);
    EXPECT_EQ(call("GET", "/search", {{"q", "all"}, {"offset", "x"}}).status, 400);
}

TEST_F(RouterTest, MappingEndpoints) {
    auto r = call("GET", "/mapping/entries");
    ASSERT_EQ(r.status, 200);
    const auto j = json::parse(r.body);
    EXPECT_EQ(j.at("label_set"), "v1_104");
    EXPECT_EQ(j.at("entries").size(), 104u);
    const auto& first = j.at("entries")[0];
    for (const auto* key : {"label", "snomed_code", "snomed_display", "radlex_id", "equivalence_degree"}) {
        EXPECT_TRUE(first.contains(key)) << key;
    }
    r = call("GET", "/mapping/coverage");
    ASSERT_EQ(r.status, 200);
    EXPECT_DOUBLE_EQ(json::parse(r.body).at("mapped_fraction").get<double>(), 1.0);
}

TEST_F(RouterTest, AuthAndBodyLimit) {
    auto c = config_in(dir);
    c.auth_token = "t0ken";
    c.max_body_bytes = 64;
    reset(c);
    EXPECT_EQ(call("GET", "/metrics").status, 401);
    EXPECT_EQ(error_code(call("GET", "/metrics", {}, {}, {{"authorization", "Bearer wrong"}})), "unauthorized");
    EXPECT_EQ(call("GET", "/metrics", {}, {}, {{"authorization", "Bearer t0ken"}}).status, 200);
    const auto r = call("POST", "/tasks", {}, std::string(65, ' '), {{"authorization", "Bearer t0ken"}});
    EXPECT_EQ(r.status, 413);
    EXPECT_EQ(error_code(r), "payload_too_large");
}

TEST_F(RouterTest, RandomInputsNeverCauseServerErrors) {
    std::mt19937_64 rng(41);
    const std::vector<std::string> methods{"GET", "POST", "PUT", "DELETE", "PATCH", ""};
    const std::vector<std::string> paths{"/tasks", "/tasks/", "/tasks/x", "/search", "/series//fhir", "/series/a/b",
                                         "/mapping/entries", "/metrics", "", "/", "//", "/series/%00/fhir"};
    const std::string alphabet = "and(or,not)code:vol:[]0123456789.-e\"\\ {}:";
    for (int i = 0; i < 3000; ++i) {
        std::string junk;
        const auto len = rng() % 40;
        for (std::size_t k = 0; k < len; ++k) {
            junk.push_back(rng() % 8 ? alphabet[rng() % alphabet.size()] : static_cast<char>(rng()));
        }
        std::map<std::string, std::string> query;
        if (rng() % 2) {
            query["q"] = junk;
        }
        if (rng() % 4 == 0) {
            query["limit"] = std::to_string(static_cast<long long>(rng() % 3000) - 10);
        }
        const auto r = call(methods[rng() % methods.size()], paths[rng() % paths.size()], query, junk);
        ASSERT_LT(r.status, 500) << r.body;
        if (r.content_type == "application/json") {
            ASSERT_NO_THROW((void)json::parse(r.body).is_object());
        }
    }
}

// ---- CLI ----

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult cli(std::vector<std::string> args) {
    std::vector<const char*> argv{"ctindex"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err, env_of({}));
    return {code, out.str(), err.str()};
}

TEST(CliTest, MappingValidate) {
    const auto r = cli({"mapping", "validate"});
    EXPECT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_EQ(j.at("valid"), true);
    EXPECT_EQ(j.at("entries"), 104);
    TempDir dir("cli-map");
    std::ofstream(dir.path() / "bad.csv") << "not a mapping\n";
    EXPECT_EQ(cli({"mapping", "validate", "--file", (dir.path() / "bad.csv").string()}).code, 3);
}

TEST(CliTest, QueryOnEmptyIndex) {
    TempDir dir("cli-empty");
    const auto r = cli({"--data-dir", dir.path().string(), "query", "all"});
    EXPECT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_EQ(j.at("total"), 0);
    EXPECT_EQ(j.at("hits"), json::array());
}

TEST(CliTest, UsageAndErrorExitCodes) {
    TempDir dir("cli-codes");
    const auto data = dir.path().string();
    EXPECT_EQ(cli({}).code, 2);
    EXPECT_EQ(cli({"frobnicate"}).code, 2);
    EXPECT_EQ(cli({"--set", "workers=zero", "--data-dir", data, "metrics"}).code, 2);
    EXPECT_EQ(cli({"--data-dir", data, "query", "and("}).code, 3);
    EXPECT_EQ(cli({"--data-dir", data, "ingest", (dir.path() / "missing.txt").string()}).code, 3);
    EXPECT_EQ(exit_code(Errc::not_found), 4);
    EXPECT_EQ(exit_code(Errc::unknown_task), 4);
    EXPECT_EQ(exit_code(Errc::duplicate_active_task), 5);
    EXPECT_EQ(exit_code(Errc::io_error), 3);
    EXPECT_EQ(exit_code(Errc::corrupt_snapshot), 1);
}

TEST(CliTest, EndToEndAndParityWithApi) {
    TempDir dir("cli-e2e");
    const auto data = (dir.path() / "data").string();
    const auto manifest = (dir.path() / "manifest.txt").string();
    auto r = cli({"synth-manifest", "--count", "100", "--seed", "7", "--patients", "40", "-o", manifest});
    ASSERT_EQ(r.code, 0) << r.err;
    r = cli({"--data-dir", data, "ingest", manifest});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out).at("enqueued"), 100);
    r = cli({"--data-dir", data, "ingest", manifest});
    EXPECT_EQ(json::parse(r.out).at("enqueued"), 0);
    EXPECT_EQ(json::parse(r.out).at("rejected").size(), 100u);

    r = cli({"--data-dir", data, "run", "--virtual-clock"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("queue_done 100\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("index_documents 100\n"), std::string::npos) << r.out;

    const std::string q = "and(code:10200004,date:[2016-01-01,])";
    r = cli({"--data-dir", data, "query", q, "--limit", "500"});
    ASSERT_EQ(r.code, 0) << r.err;

    auto c = ServiceConfig::defaults();
    c.data_dir = data;
    IndexingService service(c);
    ApiRouter router(service);
    const auto api = router.handle({"GET", "/search", {{"q", q}, {"limit", "500"}}, {}, {}});
    EXPECT_EQ(api.body, r.out);

    r = cli({"--data-dir", data, "export-fhir", (dir.path() / "fhir").string(), "--bundle-size", "50"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out).at("bundles"), 2);
}

// ---- HTTP ----

TEST(HttpServerTest, ServesRouterOverLoopback) {
    TempDir dir("http");
    auto c = config_in(dir);
    c.max_body_bytes = 4096;
    IndexingService service(c);
    ApiRouter router(service);
    HttpServer server(router, c.max_body_bytes);
    const int port = server.bind("127.0.0.1", 0);
    ASSERT_GT(port, 0);
    std::jthread serving([&] { server.serve(); });
    while (!server.running()) {
        std::this_thread::sleep_for(1ms);
    }

    httplib::Client client("127.0.0.1", port);
    const auto body = json{{"series", scheduler::series_to_json(make_series("7.7"))}, {"lane", "daily"}}.dump();
    auto res = client.Post("/tasks", body, "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 202);
    res = client.Get("/search?q=code%3A10200004&limit=5");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(json::parse(res->body).at("total"), 0);
    res = client.Get("/mapping/entries");
    ASSERT_TRUE(res);
    EXPECT_EQ(json::parse(res->body).at("entries").size(), 104u);
    res = client.Get("/tasks/task-00000099");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 404);
    res = client.Post("/tasks", std::string(5000, 'x'), "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 413);

    server.stop();
}

}  // namespace
}  // namespace ctindex::service
