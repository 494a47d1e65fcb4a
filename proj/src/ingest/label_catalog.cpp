#include "ctindex/ingest/label_catalog.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ctindex/error.hpp"
#include "ctindex/text.hpp"

#ifndef CTINDEX_SOURCE_DATA_DIR
#define CTINDEX_SOURCE_DATA_DIR "data"
#endif

namespace ctindex::ingest {

std::string_view to_string(LabelSetId id) noexcept {
    switch (id) {
        case LabelSetId::v1_104: return "v1_104";
        case LabelSetId::v2_117: return "v2_117";
        case LabelSetId::v2plus_124: return "v2plus_124";
    }
    return "v1_104";
}

LabelSetId parse_label_set_id(std::string_view text) {
    for (auto id : kAllLabelSets) {
        if (to_string(id) == text) {
            return id;
        }
    }
    throw Error(Errc::unknown_label_set, "unknown label set id '" + std::string(text) + "'");
}

std::size_t nominal_catalog_size(LabelSetId id) noexcept {
    switch (id) {
        case LabelSetId::v1_104: return 104;
        case LabelSetId::v2_117: return 117;
        case LabelSetId::v2plus_124: return 124;
    }
    return 0;
}

LabelCatalog::LabelCatalog(LabelSetId id, std::vector<CatalogLabel> labels)
    : id_(id), labels_(std::move(labels)) {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        const auto& label = labels_[i].label;
        if (!is_label(label)) {
            throw Error(Errc::schema_violation, "catalog label '" + label + "' is not [a-z0-9_]+");
        }
        if (!index_.emplace(label, i).second) {
            throw Error(Errc::duplicate_label, "catalog repeats label '" + label + "'");
        }
    }
}

LabelCatalog LabelCatalog::parse(LabelSetId id, std::string_view text) {
    std::vector<CatalogLabel> labels;
    for (auto line : split(text, '\n')) {
        line = trim(line);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto sep = line.find_first_of(" \t");
        CatalogLabel entry;
        entry.label = std::string(trim(line.substr(0, sep)));
        entry.region = sep == std::string_view::npos ? "" : std::string(trim(line.substr(sep)));
        labels.push_back(std::move(entry));
    }
    return LabelCatalog(id, std::move(labels));
}

LabelCatalog LabelCatalog::load(LabelSetId id, const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw Error(Errc::io_error, "cannot read catalog " + file.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(id, buf.str());
}

bool LabelCatalog::contains(std::string_view label) const {
    return index_.find(std::string(label)) != index_.end();
}

std::optional<std::size_t> LabelCatalog::position(std::string_view label) const {
    const auto it = index_.find(std::string(label));
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

CatalogRegistry CatalogRegistry::load_directory(const std::filesystem::path& dir) {
    CatalogRegistry registry;
    for (auto id : kAllLabelSets) {
        const auto file = dir / (std::string(to_string(id)) + ".txt");
        if (std::filesystem::exists(file)) {
            registry.add(LabelCatalog::load(id, file));
        }
    }
    if (registry.catalogs_.empty()) {
        throw Error(Errc::io_error, "no label catalogs found in " + dir.string());
    }
    return registry;
}

std::filesystem::path default_data_root() {
    if (const char* env = std::getenv("CTINDEX_DATA_ROOT"); env != nullptr && *env != '\0') {
        return env;
    }
    return CTINDEX_SOURCE_DATA_DIR;
}

std::filesystem::path CatalogRegistry::default_directory() { return default_data_root() / "catalogs"; }

void CatalogRegistry::add(LabelCatalog catalog) {
    const auto id = catalog.id();
    auto it = std::find_if(catalogs_.begin(), catalogs_.end(), [id](const auto& c) { return c.id() == id; });
    if (it != catalogs_.end()) {
        *it = std::move(catalog);
    } else {
        catalogs_.push_back(std::move(catalog));
    }
}

bool CatalogRegistry::has(LabelSetId id) const noexcept {
    return std::any_of(catalogs_.begin(), catalogs_.end(), [id](const auto& c) { return c.id() == id; });
}

const LabelCatalog& CatalogRegistry::get(LabelSetId id) const {
    for (const auto& c : catalogs_) {
        if (c.id() == id) {
            return c;
        }
    }
    throw Error(Errc::unknown_label_set, "label set " + std::string(to_string(id)) + " not loaded");
}

}  // namespace ctindex::ingest
