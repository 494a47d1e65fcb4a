#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctindex/ingest/statistics.hpp"
#include "ctindex/termmap/mapping.hpp"
#include "ctindex/time.hpp"

namespace ctindex::annotate {

struct Annotation {
    std::string label;
    std::string snomed_code;
    std::string snomed_display;
    std::optional<std::string> radlex_id;
    double volume_mm3 = 0.0;
    double mean_intensity = 0.0;

    friend bool operator==(const Annotation&, const Annotation&) = default;
};

/// Semantically enhanced series. Annotations are sorted by label.
struct AnnotationSet {
    std::string series_uid;
    std::vector<Annotation> annotations;
    std::vector<std::string> unmapped_labels;
    std::string indexer_version;
    std::string mapping_version;
    Timestamp created_at{};

    friend bool operator==(const AnnotationSet&, const AnnotationSet&) = default;
};

enum class PolicyMode { lenient, strict };

struct AnnotationPolicy {
    PolicyMode mode = PolicyMode::lenient;
    /// Structures with volume <= this are dropped silently.
    double min_volume_mm3 = 0.0;
};

struct AnnotationContext {
    std::string indexer_version;
    Timestamp created_at{};
};

/// Errors: label_set_mismatch; unmapped_label under the strict policy.
AnnotationSet annotate(const ingest::SegmentationStatistics& stats, const termmap::MappingTable& table,
                       const AnnotationPolicy& policy, const AnnotationContext& context);

struct AnnotationCount {
    std::size_t total = 0;
    double mean_per_series = 0.0;
};

AnnotationCount annotation_count(std::span<const AnnotationSet> corpus) noexcept;

inline constexpr std::string_view kAnnotationExtension = ".annotations.json";

/// Canonical JSON form, shared by the index document and audit export.
std::string serialize_annotation_set(const AnnotationSet& set);
/// Errors: malformed_file, schema_violation.
AnnotationSet parse_annotation_set(std::string_view text);

}  // namespace ctindex::annotate
