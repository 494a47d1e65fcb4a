#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctindex/ingest/series.hpp"

namespace ctindex::ingest {

// Manifest line format:
//   series_uid|study_uid|patient_pseudonym|acquisition_date|modality|source[|body_region_hint]
// Blank lines and lines starting with '#' are ignored.

/// Errors: Errc::malformed_record (with line), Errc::duplicate_series_uid.
/// `today` bounds acquisition dates; defaults to the current UTC date.
std::vector<SeriesDescriptor> parse_manifest(std::string_view text,
                                             std::optional<Date> today = std::nullopt);
std::vector<SeriesDescriptor> load_manifest(const std::filesystem::path& path,
                                            std::optional<Date> today = std::nullopt);

std::string format_manifest_line(const SeriesDescriptor& series);
std::string format_manifest(const std::vector<SeriesDescriptor>& series);

}  // namespace ctindex::ingest
