#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctindex/ingest/label_catalog.hpp"

namespace ctindex::termmap {

/// SNOMED code placeholder for degree-5 ("no map") rows.
inline constexpr std::string_view kNoMap = "NOMAP";
inline constexpr std::string_view kSnomedSystem = "http://snomed.info/sct";

/// One curated row. equivalence_degree follows the ISO/TR 12300 scale:
/// 1 equivalent, 2 equivalent via synonymy, 3 source broader than target,
/// 4 source narrower than target, 5 no map.
struct MappingEntry {
    std::string label;
    std::string snomed_code;
    std::string snomed_display;
    std::optional<std::string> radlex_id;
    int equivalence_degree = 1;
    std::string notes;

    [[nodiscard]] bool is_no_map() const noexcept { return equivalence_degree == 5; }

    friend bool operator==(const MappingEntry&, const MappingEntry&) = default;
};

class MappingTable {
public:
    MappingTable(std::string map_version, ingest::LabelSetId target,
                 std::map<std::string, MappingEntry, std::less<>> entries);

    [[nodiscard]] const std::string& map_version() const noexcept { return map_version_; }
    [[nodiscard]] ingest::LabelSetId target_label_set_id() const noexcept { return target_; }
    [[nodiscard]] const std::map<std::string, MappingEntry, std::less<>>& entries() const noexcept {
        return entries_;
    }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }

    /// Entry for `label`, or nullopt when absent or mapped to NOMAP.
    [[nodiscard]] std::optional<MappingEntry> lookup(std::string_view label) const;

    friend bool operator==(const MappingTable&, const MappingTable&) = default;

private:
    std::string map_version_;
    ingest::LabelSetId target_;
    std::map<std::string, MappingEntry, std::less<>> entries_;
};

/// Parses the CSV table format:
///
///   # map_version: 1.0.0
///   # label_set: v1_104
///   label,snomed_code,snomed_display,radlex_id,equivalence_degree,notes
///   liver,10200004,Liver structure,RID58,1,
///
/// All-or-nothing. Errors: malformed_row (with row), duplicate_label,
/// unknown_label, bad_equivalence_degree, unknown_label_set.
MappingTable parse_mapping(std::string_view text, const ingest::CatalogRegistry& catalogs);
MappingTable load_mapping(const std::filesystem::path& source, const ingest::CatalogRegistry& catalogs);
std::string serialize_mapping(const MappingTable& table);

/// Bundled table for the v1 label set.
std::filesystem::path default_mapping_path();

/// SNOMED CT concept identifier syntax: 6-18 digits, concept partition
/// and valid Verhoeff check digit.
bool is_valid_sctid(std::string_view code) noexcept;

struct CoverageReport {
    ingest::LabelSetId label_set_id = ingest::LabelSetId::v1_104;
    std::size_t catalog_size = 0;
    std::size_t entry_count = 0;
    std::vector<std::string> mapped_labels;
    std::vector<std::string> unmapped_labels;
    /// Entries per equivalence degree; index 0 is degree 1.
    std::array<std::size_t, 5> degree_histogram{};
    double mapped_fraction = 0.0;

    [[nodiscard]] std::size_t mapped_count() const noexcept { return mapped_labels.size(); }
};

/// Catalog labels with a degree 1-4 entry count as mapped. Throws
/// Errc::catalog_mismatch when the catalog is for a different label set.
CoverageReport coverage_report(const MappingTable& table, const ingest::LabelCatalog& catalog);

}  // namespace ctindex::termmap
