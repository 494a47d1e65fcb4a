#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ctindex::ingest {

enum class LabelSetId { v1_104, v2_117, v2plus_124 };

inline constexpr std::array<LabelSetId, 3> kAllLabelSets{LabelSetId::v1_104, LabelSetId::v2_117,
                                                         LabelSetId::v2plus_124};

std::string_view to_string(LabelSetId id) noexcept;
/// Throws Errc::unknown_label_set.
LabelSetId parse_label_set_id(std::string_view text);
/// Nominal catalog size of each segmenter version (104/117/124).
std::size_t nominal_catalog_size(LabelSetId id) noexcept;

struct CatalogLabel {
    std::string label;
    std::string region;
};

/// Versioned list of labels one segmenter release can emit, in
/// cranio-caudal order.
class LabelCatalog {
public:
    LabelCatalog(LabelSetId id, std::vector<CatalogLabel> labels);

    /// Parses the `label region` line format (`#` comments allowed).
    static LabelCatalog parse(LabelSetId id, std::string_view text);
    static LabelCatalog load(LabelSetId id, const std::filesystem::path& file);

    [[nodiscard]] LabelSetId id() const noexcept { return id_; }
    [[nodiscard]] std::size_t size() const noexcept { return labels_.size(); }
    [[nodiscard]] const std::vector<CatalogLabel>& labels() const noexcept { return labels_; }
    [[nodiscard]] bool contains(std::string_view label) const;
    [[nodiscard]] std::optional<std::size_t> position(std::string_view label) const;

private:
    LabelSetId id_;
    std::vector<CatalogLabel> labels_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// All label catalogs known to a process.
class CatalogRegistry {
public:
    /// Loads `<id>.txt` for every label set present in `dir`.
    static CatalogRegistry load_directory(const std::filesystem::path& dir);

    /// Bundled data directory: $CTINDEX_DATA_ROOT/catalogs, else the
    /// source tree location baked in at build time.
    static std::filesystem::path default_directory();

    void add(LabelCatalog catalog);
    [[nodiscard]] bool has(LabelSetId id) const noexcept;
    /// Throws Errc::unknown_label_set when the catalog was not loaded.
    [[nodiscard]] const LabelCatalog& get(LabelSetId id) const;

private:
    std::vector<LabelCatalog> catalogs_;
};

/// Root of the bundled data files (catalogs/, mapping/).
std::filesystem::path default_data_root();

}  // namespace ctindex::ingest
