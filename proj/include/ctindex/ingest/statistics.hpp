#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ctindex/ingest/label_catalog.hpp"
#include "ctindex/ingest/series.hpp"

namespace ctindex::ingest {

struct StructureStat {
    std::string label;
    double volume_mm3 = 0.0;
    double mean_intensity = 0.0;

    friend bool operator==(const StructureStat&, const StructureStat&) = default;
};

/// Content of one `.segstats.json` file.
struct SegmentationStatistics {
    std::string series_uid;
    std::string segmenter_name;
    std::string segmenter_version;
    LabelSetId label_set_id = LabelSetId::v1_104;
    std::vector<StructureStat> structures;

    friend bool operator==(const SegmentationStatistics&, const SegmentationStatistics&) = default;
};

inline constexpr std::string_view kStatisticsExtension = ".segstats.json";

/// Parses and validates a statistics file. Structure order follows the
/// file. Zero volumes are kept.
///
/// Errors: malformed_file (not JSON / not UTF-8), schema_violation
/// (missing or mistyped field, negative or non-finite value, duplicate
/// label, bad label syntax, unknown label set), unknown_label (label not
/// in the catalog), series_mismatch.
SegmentationStatistics parse_statistics(std::string_view raw, const SeriesDescriptor& expected,
                                        const CatalogRegistry& catalogs);

/// Canonical text form; parse_statistics reads it back to an equal value.
std::string serialize_statistics(const SegmentationStatistics& stats);

}  // namespace ctindex::ingest
