#include "ctindex/ingest/statistics.hpp"

#include <cmath>
#include <json.hpp>
#include <set>
#include <unordered_set>

#include "ctindex/error.hpp"
#include "ctindex/text.hpp"

namespace ctindex::ingest {

namespace {

using ordered_json = nlohmann::ordered_json;

// nlohmann keeps one value per key, so repeated keys are caught while
// parsing rather than on the DOM.
ordered_json parse_rejecting_duplicates(std::string_view raw) {
    std::vector<std::set<std::string>> scopes;
    std::string duplicate;
    auto callback = [&](int /*depth*/, nlohmann::detail::parse_event_t event, ordered_json& parsed) {
        using nlohmann::detail::parse_event_t;
        switch (event) {
            case parse_event_t::object_start:
                scopes.emplace_back();
                break;
            case parse_event_t::object_end:
                if (!scopes.empty()) {
                    scopes.pop_back();
                }
                break;
            case parse_event_t::key:
                if (!scopes.empty() && !scopes.back().insert(parsed.get<std::string>()).second &&
                    duplicate.empty()) {
                    duplicate = parsed.get<std::string>();
                }
                break;
            default:
                break;
        }
        return true;
    };
    ordered_json doc;
    try {
        doc = ordered_json::parse(raw.begin(), raw.end(), callback);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::malformed_file, std::string("statistics file is not valid JSON: ") + e.what());
    }
    if (!duplicate.empty()) {
        throw Error(Errc::schema_violation, "duplicate key '" + duplicate + "'");
    }
    return doc;
}

const std::string& require_string(const ordered_json& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) {
        throw Error(Errc::schema_violation, std::string("missing or non-string field '") + key + "'");
    }
    return it->get_ref<const std::string&>();
}

double require_number(const ordered_json& obj, const char* key, const std::string& label) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_number()) {
        throw Error(Errc::schema_violation,
                    "structure '" + label + "': missing or non-numeric '" + key + "'");
    }
    const double value = it->get<double>();
    if (!std::isfinite(value)) {
        throw Error(Errc::schema_violation, "structure '" + label + "': non-finite '" + key + "'");
    }
    return value;
}

}  // namespace

SegmentationStatistics parse_statistics(std::string_view raw, const SeriesDescriptor& expected,
                                        const CatalogRegistry& catalogs) {
    const auto doc = parse_rejecting_duplicates(raw);
    if (!doc.is_object()) {
        throw Error(Errc::schema_violation, "statistics file must be a JSON object");
    }

    SegmentationStatistics stats;
    stats.series_uid = require_string(doc, "series_uid");
    stats.segmenter_name = require_string(doc, "segmenter_name");
    stats.segmenter_version = require_string(doc, "segmenter_version");
    if (stats.series_uid.empty() || stats.segmenter_name.empty()) {
        throw Error(Errc::schema_violation, "series_uid and segmenter_name must be non-empty");
    }
    if (!is_semver(stats.segmenter_version)) {
        throw Error(Errc::schema_violation,
                    "segmenter_version '" + stats.segmenter_version + "' is not a semantic version");
    }
    try {
        stats.label_set_id = parse_label_set_id(require_string(doc, "label_set_id"));
    } catch (const Error& e) {
        if (e.code() == Errc::unknown_label_set) {
            throw Error(Errc::schema_violation, e.what());
        }
        throw;
    }
    if (stats.series_uid != expected.series_uid) {
        throw Error(Errc::series_mismatch, "file describes series '" + stats.series_uid +
                                               "', expected '" + expected.series_uid + "'");
    }

    const auto structures = doc.find("structures");
    if (structures == doc.end() || !structures->is_object()) {
        throw Error(Errc::schema_violation, "'structures' must be an object keyed by label");
    }
    const auto& catalog = catalogs.get(stats.label_set_id);
    stats.structures.reserve(structures->size());
    for (const auto& [label, value] : structures->items()) {
        if (!is_label(label)) {
            throw Error(Errc::schema_violation, "label '" + label + "' is not [a-z0-9_]+");
        }
        if (!value.is_object()) {
            throw Error(Errc::schema_violation, "structure '" + label + "' must be an object");
        }
        StructureStat s;
        s.label = label;
        s.volume_mm3 = require_number(value, "volume_mm3", label);
        s.mean_intensity = require_number(value, "mean_intensity", label);
        if (s.volume_mm3 < 0.0) {
            throw Error(Errc::schema_violation, "structure '" + label + "' has negative volume");
        }
        if (!catalog.contains(label)) {
            throw Error(Errc::unknown_label, "label '" + label + "' is not in catalog " +
                                                 std::string(to_string(stats.label_set_id)));
        }
        stats.structures.push_back(std::move(s));
    }
    return stats;
}

std::string serialize_statistics(const SegmentationStatistics& stats) {
    ordered_json doc;
    doc["series_uid"] = stats.series_uid;
    doc["segmenter_name"] = stats.segmenter_name;
    doc["segmenter_version"] = stats.segmenter_version;
    doc["label_set_id"] = std::string(to_string(stats.label_set_id));
    auto structures = ordered_json::object();
    for (const auto& s : stats.structures) {
        structures[s.label] = ordered_json{{"volume_mm3", s.volume_mm3}, {"mean_intensity", s.mean_intensity}};
    }
    doc["structures"] = std::move(structures);
    return doc.dump(2) + "\n";
}

}  // namespace ctindex::ingest
