#include "ctindex/service/config.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "ctindex/error.hpp"
#include "ctindex/search/index.hpp"
#include "ctindex/termmap/mapping.hpp"
#include "ctindex/text.hpp"

namespace ctindex::service {

namespace {

constexpr std::array<std::string_view, 21> kKeys{
    "listen", "data_dir", "mapping", "catalogs", "stats_dir", "label_set", "workers",
    "max_attempts", "retry_backoff_ms", "legacy_order", "policy", "min_volume_mm3", "bundle_size", "auth_token",
    "backend", "seed", "mock_mean_structures", "mock_service_seconds", "default_page_limit",
    "max_page_limit", "max_body_bytes",
};

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view expected) {
    throw Error(Errc::config_invalid,
                "option '" + std::string(key) + "': '" + std::string(value) + "' is not " + std::string(expected));
}

template <typename T>
T parse_unsigned(std::string_view key, std::string_view value) {
    T out{};
    const auto t = trim(value);
    auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || ec != std::errc{} || end != t.data() + t.size()) {
        bad(key, value, "a non-negative integer");
    }
    return out;
}

double parse_number(std::string_view key, std::string_view value) {
    double out = 0.0;
    const auto t = trim(value);
    auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || ec != std::errc{} || end != t.data() + t.size() || !std::isfinite(out)) {
        bad(key, value, "a finite number");
    }
    return out;
}

}  // namespace

std::string_view to_string(Backend b) noexcept { return b == Backend::mock ? "mock" : "files"; }

ServiceConfig ServiceConfig::defaults() {
    ServiceConfig c;
    c.mapping_path = termmap::default_mapping_path();
    c.catalog_dir = ingest::CatalogRegistry::default_directory();
    return c;
}

std::filesystem::path ServiceConfig::effective_stats_dir() const {
    return stats_dir.empty() ? data_dir / "stats" : stats_dir;
}

void set_option(ServiceConfig& c, std::string_view key, std::string_view value) {
    if (key == "listen") {
        const auto colon = value.rfind(':');
        if (colon == std::string_view::npos || colon == 0) {
            bad(key, value, "host:port");
        }
        c.listen_host = std::string(value.substr(0, colon));
        c.listen_port = parse_unsigned<std::uint16_t>(key, value.substr(colon + 1));
    } else if (key == "data_dir") {
        c.data_dir = std::string(value);
    } else if (key == "mapping") {
        c.mapping_path = std::string(value);
    } else if (key == "catalogs") {
        c.catalog_dir = std::string(value);
    } else if (key == "stats_dir") {
        c.stats_dir = std::string(value);
    } else if (key == "label_set") {
        try {
            c.label_set_id = ingest::parse_label_set_id(value);
        } catch (const Error&) {
            bad(key, value, "a known label set");
        }
    } else if (key == "workers") {
        c.pool.worker_count = parse_unsigned<std::size_t>(key, value);
    } else if (key == "max_attempts") {
        c.pool.max_attempts = parse_unsigned<std::uint32_t>(key, value);
    } else if (key == "retry_backoff_ms") {
        c.pool.retry_backoff.clear();
        for (auto part : split(value, ',')) {
            if (!trim(part).empty()) {
                c.pool.retry_backoff.emplace_back(parse_unsigned<std::int64_t>(key, part));
            }
        }
    } else if (key == "legacy_order") {
        if (value == "oldest_first") {
            c.legacy_order = scheduler::LegacyOrder::oldest_first;
        } else if (value == "newest_first") {
            c.legacy_order = scheduler::LegacyOrder::newest_first;
        } else {
            bad(key, value, "oldest_first or newest_first");
        }
    } else if (key == "policy") {
        if (value == "lenient") {
            c.policy.mode = annotate::PolicyMode::lenient;
        } else if (value == "strict") {
            c.policy.mode = annotate::PolicyMode::strict;
        } else {
            bad(key, value, "lenient or strict");
        }
    } else if (key == "min_volume_mm3") {
        c.policy.min_volume_mm3 = parse_number(key, value);
    } else if (key == "bundle_size") {
        c.bundle_size = parse_unsigned<std::size_t>(key, value);
    } else if (key == "auth_token") {
        if (value.empty()) {
            c.auth_token.reset();
        } else {
            c.auth_token = std::string(value);
        }
    } else if (key == "backend") {
        if (value == "mock") {
            c.backend = Backend::mock;
        } else if (value == "files") {
            c.backend = Backend::files;
        } else {
            bad(key, value, "mock or files");
        }
    } else if (key == "seed") {
        c.seed = parse_unsigned<std::uint64_t>(key, value);
    } else if (key == "mock_mean_structures") {
        c.mock_mean_structures = parse_number(key, value);
    } else if (key == "mock_service_seconds") {
        const double s = parse_number(key, value);
        if (s < 0.0) {
            bad(key, value, "non-negative");
        }
        c.mock_service_time = std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(s * 1000.0)));
    } else if (key == "default_page_limit") {
        c.default_page_limit = parse_unsigned<std::size_t>(key, value);
    } else if (key == "max_page_limit") {
        c.max_page_limit = parse_unsigned<std::size_t>(key, value);
    } else if (key == "max_body_bytes") {
        c.max_body_bytes = parse_unsigned<std::size_t>(key, value);
    } else {
        throw Error(Errc::config_invalid, "unknown option '" + std::string(key) + "'");
    }
}

void apply_config_file(ServiceConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::io_error, "cannot read config file " + path.string());
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::config_invalid, "config file " + path.string() + " is not JSON: " + e.what());
    }
    if (!j.is_object()) {
        throw Error(Errc::config_invalid, "config file must hold a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (value.is_string()) {
            set_option(config, key, value.get<std::string>());
        } else if (value.is_number() || value.is_boolean()) {
            set_option(config, key, value.dump());
        } else if (value.is_array()) {
            std::string joined;
            for (const auto& v : value) {
                if (!v.is_number()) {
                    throw Error(Errc::config_invalid, "option '" + key + "' must be an array of numbers");
                }
                joined += (joined.empty() ? "" : ",") + v.dump();
            }
            set_option(config, key, joined);
        } else if (value.is_null() && key == "auth_token") {
            config.auth_token.reset();
        } else {
            throw Error(Errc::config_invalid, "option '" + key + "' has an unsupported type");
        }
    }
}

void apply_environment(ServiceConfig& config, const EnvLookup& lookup) {
    for (auto key : kKeys) {
        std::string name = "CTINDEX_";
        for (char ch : key) {
            name += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        }
        if (auto value = lookup(name)) {
            set_option(config, key, *value);
        }
    }
}

EnvLookup process_environment() {
    return [](const std::string& name) -> std::optional<std::string> {
        if (const char* v = std::getenv(name.c_str())) {
            return std::string(v);
        }
        return std::nullopt;
    };
}

void validate_config(const ServiceConfig& c) {
    auto invalid = [](const std::string& what) { throw Error(Errc::config_invalid, what); };
    if (c.pool.worker_count == 0) {
        invalid("workers must be at least 1");
    }
    if (c.pool.max_attempts == 0) {
        invalid("max_attempts must be at least 1");
    }
    if (c.bundle_size == 0) {
        invalid("bundle_size must be at least 1");
    }
    if (c.max_page_limit == 0 || c.max_page_limit > search::kMaxPageLimit) {
        invalid("max_page_limit must be in [1, " + std::to_string(search::kMaxPageLimit) + "]");
    }
    if (c.default_page_limit == 0 || c.default_page_limit > c.max_page_limit) {
        invalid("default_page_limit must be in [1, max_page_limit]");
    }
    if (c.mock_mean_structures < 1.0) {
        invalid("mock_mean_structures must be at least 1");
    }
    if (c.policy.min_volume_mm3 < 0.0) {
        invalid("min_volume_mm3 must be non-negative");
    }
    if (c.data_dir.empty()) {
        invalid("data_dir must be set");
    }
    std::error_code ec;
    if (!std::filesystem::is_regular_file(c.mapping_path, ec)) {
        invalid("mapping table not found: " + c.mapping_path.string());
    }
    if (!std::filesystem::is_directory(c.catalog_dir, ec)) {
        invalid("catalog directory not found: " + c.catalog_dir.string());
    }
}

}  // namespace ctindex::service
