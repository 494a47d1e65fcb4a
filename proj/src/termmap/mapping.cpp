#include "ctindex/termmap/mapping.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ctindex/error.hpp"
#include "ctindex/text.hpp"

namespace ctindex::termmap {

namespace {

constexpr std::array<std::string_view, 6> kColumns{"label",      "snomed_code",        "snomed_display",
                                                   "radlex_id", "equivalence_degree", "notes"};

// RFC 4180 record splitting for one physical line. Quoted fields may
// contain commas and doubled quotes but not line breaks.
std::vector<std::string> split_csv_line(std::string_view line, std::size_t row) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            if (!field.empty() || was_quoted) {
                throw Error(Errc::malformed_row, "stray quote", row);
            }
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            was_quoted = false;
        } else {
            if (was_quoted) {
                throw Error(Errc::malformed_row, "text after closing quote", row);
            }
            field.push_back(c);
        }
    }
    if (quoted) {
        throw Error(Errc::malformed_row, "unterminated quote", row);
    }
    fields.push_back(std::move(field));
    return fields;
}

std::string csv_field(std::string_view value) {
    if (value.find_first_of(",\"") == std::string_view::npos) {
        return std::string(value);
    }
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

bool is_radlex_id(std::string_view s) noexcept {
    if (s.size() < 4 || s.substr(0, 3) != "RID") {
        return false;
    }
    for (char c : s.substr(3)) {
        if (c < '0' || c > '9') {
            return false;
        }
    }
    return true;
}

}  // namespace

bool is_valid_sctid(std::string_view code) noexcept {
    static constexpr int d[10][10] = {
        {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, {1, 2, 3, 4, 0, 6, 7, 8, 9, 5}, {2, 3, 4, 0, 1, 7, 8, 9, 5, 6},
        {3, 4, 0, 1, 2, 8, 9, 5, 6, 7}, {4, 0, 1, 2, 3, 9, 5, 6, 7, 8}, {5, 9, 8, 7, 6, 0, 4, 3, 2, 1},
        {6, 5, 9, 8, 7, 1, 0, 4, 3, 2}, {7, 6, 5, 9, 8, 2, 1, 0, 4, 3}, {8, 7, 6, 5, 9, 3, 2, 1, 0, 4},
        {9, 8, 7, 6, 5, 4, 3, 2, 1, 0}};
    static constexpr int p[8][10] = {
        {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, {1, 5, 7, 6, 2, 8, 3, 0, 9, 4}, {5, 8, 0, 3, 7, 9, 6, 1, 4, 2},
        {8, 9, 1, 6, 0, 4, 3, 5, 2, 7}, {9, 4, 5, 3, 1, 2, 6, 8, 7, 0}, {4, 2, 8, 6, 5, 7, 3, 9, 0, 1},
        {2, 7, 9, 3, 8, 0, 6, 4, 1, 5}, {7, 0, 4, 6, 9, 1, 3, 2, 5, 8}};
    if (code.size() < 6 || code.size() > 18 || code.front() == '0') {
        return false;
    }
    for (char c : code) {
        if (c < '0' || c > '9') {
            return false;
        }
    }
    // Partition identifier: 00 (core concept) or 10 (extension concept).
    const auto partition = code.substr(code.size() - 3, 2);
    if (partition != "00" && partition != "10") {
        return false;
    }
    int check = 0;
    std::size_t i = 0;
    for (auto it = code.rbegin(); it != code.rend(); ++it, ++i) {
        check = d[check][p[i % 8][*it - '0']];
    }
    return check == 0;
}

MappingTable::MappingTable(std::string map_version, ingest::LabelSetId target,
                           std::map<std::string, MappingEntry, std::less<>> entries)
    : map_version_(std::move(map_version)), target_(target), entries_(std::move(entries)) {}

std::optional<MappingEntry> MappingTable::lookup(std::string_view label) const {
    const auto it = entries_.find(label);
    if (it == entries_.end() || it->second.is_no_map()) {
        return std::nullopt;
    }
    return it->second;
}

MappingTable parse_mapping(std::string_view text, const ingest::CatalogRegistry& catalogs) {
    std::optional<std::string> map_version;
    std::optional<ingest::LabelSetId> label_set;
    bool header_seen = false;
    std::map<std::string, MappingEntry, std::less<>> entries;
    const ingest::LabelCatalog* catalog = nullptr;

    std::size_t row = 0;
    for (auto line : split(text, '\n')) {
        ++row;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (trim(line).empty()) {
            continue;
        }
        if (!header_seen && trim(line).front() == '#') {
            const auto body = trim(trim(line).substr(1));
            const auto colon = body.find(':');
            if (colon == std::string_view::npos) {
                continue;
            }
            const auto key = trim(body.substr(0, colon));
            const auto value = trim(body.substr(colon + 1));
            if (key == "map_version") {
                if (!is_semver(value)) {
                    throw Error(Errc::malformed_row, "map_version is not a semantic version", row);
                }
                map_version = std::string(value);
            } else if (key == "label_set") {
                label_set = ingest::parse_label_set_id(value);
            }
            continue;
        }
        const auto fields = split_csv_line(line, row);
        if (!header_seen) {
            if (fields.size() != kColumns.size()) {
                throw Error(Errc::malformed_row, "header must list the 6 mapping columns", row);
            }
            for (std::size_t i = 0; i < kColumns.size(); ++i) {
                if (trim(fields[i]) != kColumns[i]) {
                    throw Error(Errc::malformed_row,
                                "header column " + std::to_string(i + 1) + " must be '" +
                                    std::string(kColumns[i]) + "'",
                                row);
                }
            }
            if (!map_version || !label_set) {
                throw Error(Errc::malformed_row,
                            "'# map_version:' and '# label_set:' lines must precede the header", row);
            }
            catalog = &catalogs.get(*label_set);
            header_seen = true;
            continue;
        }
        if (fields.size() != kColumns.size()) {
            throw Error(Errc::malformed_row,
                        "expected 6 columns, got " + std::to_string(fields.size()), row);
        }
        MappingEntry e;
        e.label = std::string(trim(fields[0]));
        e.snomed_code = std::string(trim(fields[1]));
        e.snomed_display = std::string(trim(fields[2]));
        const auto radlex = trim(fields[3]);
        const auto degree_text = trim(fields[4]);
        e.notes = std::string(trim(fields[5]));

        if (!is_label(e.label)) {
            throw Error(Errc::malformed_row, "label '" + e.label + "' is not [a-z0-9_]+", row);
        }
        int degree = 0;
        const auto [ptr, ec] = std::from_chars(degree_text.data(), degree_text.data() + degree_text.size(), degree);
        if (degree_text.empty() || ec != std::errc{} || ptr != degree_text.data() + degree_text.size() ||
            degree < 1 || degree > 5) {
            throw Error(Errc::bad_equivalence_degree,
                        "equivalence_degree '" + std::string(degree_text) + "' is not in 1..5", row);
        }
        e.equivalence_degree = degree;
        if (degree == 5) {
            if (e.snomed_code != kNoMap) {
                throw Error(Errc::malformed_row, "degree 5 rows must carry snomed_code NOMAP", row);
            }
        } else if (!is_valid_sctid(e.snomed_code)) {
            throw Error(Errc::malformed_row, "'" + e.snomed_code + "' is not a valid SNOMED CT concept id",
                        row);
        }
        if (degree != 5 && e.snomed_display.empty()) {
            throw Error(Errc::malformed_row, "snomed_display is empty", row);
        }
        if (!radlex.empty()) {
            if (!is_radlex_id(radlex)) {
                throw Error(Errc::malformed_row, "radlex_id '" + std::string(radlex) + "' is not RID<digits>",
                            row);
            }
            e.radlex_id = std::string(radlex);
        }
        if (!catalog->contains(e.label)) {
            throw Error(Errc::unknown_label,
                        "label '" + e.label + "' is not in catalog " + std::string(to_string(*label_set)), row);
        }
        const auto label = e.label;
        if (!entries.emplace(label, std::move(e)).second) {
            throw Error(Errc::duplicate_label, "label '" + label + "' repeated", row);
        }
    }
    if (!header_seen) {
        throw Error(Errc::malformed_row, "missing header row", row);
    }
    return MappingTable(*map_version, *label_set, std::move(entries));
}

MappingTable load_mapping(const std::filesystem::path& source, const ingest::CatalogRegistry& catalogs) {
    std::ifstream in(source, std::ios::binary);
    if (!in) {
        throw Error(Errc::io_error, "cannot read mapping table " + source.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_mapping(buf.str(), catalogs);
}

std::string serialize_mapping(const MappingTable& table) {
    std::string out = "# map_version: " + table.map_version() + "\n# label_set: " +
                      std::string(to_string(table.target_label_set_id())) + "\n";
    out += "label,snomed_code,snomed_display,radlex_id,equivalence_degree,notes\n";
    for (const auto& [label, e] : table.entries()) {
        out += csv_field(e.label) + ',' + csv_field(e.snomed_code) + ',' + csv_field(e.snomed_display) + ',' +
               csv_field(e.radlex_id.value_or("")) + ',' + std::to_string(e.equivalence_degree) + ',' +
               csv_field(e.notes) + '\n';
    }
    return out;
}

std::filesystem::path default_mapping_path() {
    return ingest::default_data_root() / "mapping" / "totalsegmentator_v1_snomed.csv";
}

CoverageReport coverage_report(const MappingTable& table, const ingest::LabelCatalog& catalog) {
    if (catalog.id() != table.target_label_set_id()) {
        throw Error(Errc::catalog_mismatch, "table targets " + std::string(to_string(table.target_label_set_id())) +
                                                " but catalog is " + std::string(to_string(catalog.id())));
    }
    CoverageReport report;
    report.label_set_id = catalog.id();
    report.catalog_size = catalog.size();
    report.entry_count = table.size();
    for (const auto& [label, e] : table.entries()) {
        ++report.degree_histogram[static_cast<std::size_t>(e.equivalence_degree - 1)];
    }
    for (const auto& c : catalog.labels()) {
        if (table.lookup(c.label)) {
            report.mapped_labels.push_back(c.label);
        } else {
            report.unmapped_labels.push_back(c.label);
        }
    }
    report.mapped_fraction = catalog.size() == 0
                                 ? 0.0
                                 : static_cast<double>(report.mapped_labels.size()) /
                                       static_cast<double>(catalog.size());
    return report;
}

}  // namespace ctindex::termmap
