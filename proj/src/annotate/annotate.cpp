#include "ctindex/annotate/annotate.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <unordered_set>

#include "ctindex/error.hpp"

namespace ctindex::annotate {

using nlohmann::json;

AnnotationSet annotate(const ingest::SegmentationStatistics& stats, const termmap::MappingTable& table,
                       const AnnotationPolicy& policy, const AnnotationContext& context) {
    if (table.target_label_set_id() != stats.label_set_id) {
        throw Error(Errc::label_set_mismatch,
                    "statistics use " + std::string(to_string(stats.label_set_id)) + " but mapping targets " +
                        std::string(to_string(table.target_label_set_id())));
    }
    AnnotationSet set;
    set.series_uid = stats.series_uid;
    set.indexer_version = context.indexer_version;
    set.mapping_version = table.map_version();
    set.created_at = context.created_at;

    for (const auto& s : stats.structures) {
        if (!(s.volume_mm3 > policy.min_volume_mm3)) {
            continue;
        }
        const auto entry = table.lookup(s.label);
        if (!entry) {
            if (policy.mode == PolicyMode::strict) {
                throw Error(Errc::unmapped_label, "label '" + s.label + "' has no mapping");
            }
            set.unmapped_labels.push_back(s.label);
            continue;
        }
        Annotation a;
        a.label = s.label;
        a.snomed_code = entry->snomed_code;
        a.snomed_display = entry->snomed_display;
        a.radlex_id = entry->radlex_id;
        a.volume_mm3 = s.volume_mm3;
        a.mean_intensity = s.mean_intensity;
        set.annotations.push_back(std::move(a));
    }
    std::sort(set.annotations.begin(), set.annotations.end(),
              [](const Annotation& l, const Annotation& r) { return l.label < r.label; });
    std::sort(set.unmapped_labels.begin(), set.unmapped_labels.end());
    return set;
}

AnnotationCount annotation_count(std::span<const AnnotationSet> corpus) noexcept {
    AnnotationCount count;
    for (const auto& set : corpus) {
        count.total += set.annotations.size();
    }
    if (!corpus.empty()) {
        count.mean_per_series = static_cast<double>(count.total) / static_cast<double>(corpus.size());
    }
    return count;
}

std::string serialize_annotation_set(const AnnotationSet& set) {
    json doc;
    doc["series_uid"] = set.series_uid;
    doc["indexer_version"] = set.indexer_version;
    doc["mapping_version"] = set.mapping_version;
    doc["created_at"] = format_timestamp(set.created_at);
    auto annotations = json::array();
    for (const auto& a : set.annotations) {
        json item{{"label", a.label},
                  {"snomed_code", a.snomed_code},
                  {"snomed_display", a.snomed_display},
                  {"volume_mm3", a.volume_mm3},
                  {"mean_intensity", a.mean_intensity}};
        if (a.radlex_id) {
            item["radlex_id"] = *a.radlex_id;
        }
        annotations.push_back(std::move(item));
    }
    doc["annotations"] = std::move(annotations);
    doc["unmapped_labels"] = set.unmapped_labels;
    return doc.dump(2) + "\n";
}

namespace {

const json& field(const json& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw Error(Errc::schema_violation, std::string("annotation set lacks '") + key + "'");
    }
    return *it;
}

}  // namespace

AnnotationSet parse_annotation_set(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::exception& e) {
        throw Error(Errc::malformed_file, std::string("annotation set is not valid JSON: ") + e.what());
    }
    try {
        AnnotationSet set;
        set.series_uid = field(doc, "series_uid").get<std::string>();
        set.indexer_version = field(doc, "indexer_version").get<std::string>();
        set.mapping_version = field(doc, "mapping_version").get<std::string>();
        const auto created = parse_timestamp(field(doc, "created_at").get<std::string>());
        if (!created) {
            throw Error(Errc::schema_violation, "created_at is not an ISO-8601 UTC instant");
        }
        set.created_at = *created;
        for (const auto& item : field(doc, "annotations")) {
            Annotation a;
            a.label = field(item, "label").get<std::string>();
            a.snomed_code = field(item, "snomed_code").get<std::string>();
            a.snomed_display = field(item, "snomed_display").get<std::string>();
            a.volume_mm3 = field(item, "volume_mm3").get<double>();
            a.mean_intensity = field(item, "mean_intensity").get<double>();
            if (const auto it = item.find("radlex_id"); it != item.end()) {
                a.radlex_id = it->get<std::string>();
            }
            set.annotations.push_back(std::move(a));
        }
        set.unmapped_labels = field(doc, "unmapped_labels").get<std::vector<std::string>>();
        return set;
    } catch (const json::exception& e) {
        throw Error(Errc::schema_violation, std::string("annotation set field has wrong type: ") + e.what());
    }
}

}  // namespace ctindex::annotate
