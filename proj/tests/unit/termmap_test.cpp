#include <gtest/gtest.h>

#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "../support/fixtures.hpp"
#include "ctindex/error.hpp"
#include "ctindex/termmap/mapping.hpp"

namespace ctindex::termmap {
namespace {

using ingest::LabelSetId;
using testing::catalogs;
using testing::v1_mapping;

std::string bundled_text() {
    std::ifstream in(default_mapping_path());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Bundled table with the rows of `labels` removed.
std::string without(const std::set<std::string>& labels) {
    std::istringstream in(bundled_text());
    std::string out;
    for (std::string line; std::getline(in, line);) {
        const auto label = line.substr(0, line.find(','));
        if (!labels.count(label)) {
            out += line + "\n";
        }
    }
    return out;
}

std::string header(std::string_view label_set = "v1_104") {
    return "# map_version: 1.0.0\n# label_set: " + std::string(label_set) +
           "\nlabel,snomed_code,snomed_display,radlex_id,equivalence_degree,notes\n";
}

Error error_of(const std::string& text) {
    try {
        parse_mapping(text, catalogs());
    } catch (const Error& e) {
        return e;
    }
    ADD_FAILURE() << "expected an Error";
    return Error(Errc::invalid_argument, "none");
}

TEST(MappingTable, BundledTableHas104Entries) {
    EXPECT_EQ(v1_mapping().size(), 104u);
    EXPECT_EQ(v1_mapping().target_label_set_id(), LabelSetId::v1_104);
    EXPECT_EQ(v1_mapping().map_version(), "1.0.0");
}

TEST(MappingTable, LiverLookup) {
    const auto e = v1_mapping().lookup("liver");
    ASSERT_TRUE(e);
    EXPECT_EQ(e->snomed_code, "10200004");
    EXPECT_EQ(e->snomed_display, "Liver structure");
    EXPECT_EQ(v1_mapping().lookup("liver"), e);
}

TEST(MappingTable, AbsentAndNoMapLabelsAreNotMapped) {
    EXPECT_FALSE(v1_mapping().lookup("nonexistent_xyz"));
    const auto table = parse_mapping(header() + "liver,NOMAP,No equivalent concept,,5,\n", catalogs());
    EXPECT_EQ(table.size(), 1u);
    EXPECT_FALSE(table.lookup("liver"));
}

TEST(MappingTable, DuplicateLabel) {
    const auto e = error_of(header() + "liver,10200004,Liver structure,RID58,1,\nliver,10200004,Liver structure,RID58,1,\n");
    EXPECT_EQ(e.code(), Errc::duplicate_label);
    EXPECT_EQ(e.location(), 5u);
}

TEST(MappingTable, DegreeOutOfScale) {
    EXPECT_EQ(error_of(header() + "liver,10200004,Liver structure,RID58,0,\n").code(), Errc::bad_equivalence_degree);
    EXPECT_EQ(error_of(header() + "liver,10200004,Liver structure,RID58,6,\n").code(), Errc::bad_equivalence_degree);
}

TEST(MappingTable, RowLevelRejections) {
    EXPECT_EQ(error_of(header() + "liver,10200005,Liver structure,RID58,1,\n").code(), Errc::malformed_row);
    EXPECT_EQ(error_of(header() + "liver,10200004,Liver structure,58,1,\n").code(), Errc::malformed_row);
    EXPECT_EQ(error_of(header() + "liver,10200004,Liver structure,RID58,5,\n").code(), Errc::malformed_row);
    EXPECT_EQ(error_of(header() + "liver,10200004,Liver structure,RID58\n").code(), Errc::malformed_row);
    EXPECT_EQ(error_of(header() + "not_a_label,10200004,X,,1,\n").code(), Errc::unknown_label);
    EXPECT_EQ(error_of("label,snomed_code,snomed_display,radlex_id,equivalence_degree,notes\n").code(),
              Errc::malformed_row);
    EXPECT_EQ(error_of(header("v9_999")).code(), Errc::unknown_label_set);
}

TEST(MappingTable, QuotedFields) {
    const auto table = parse_mapping(header() + "liver,10200004,\"Liver structure, whole\",RID58,1,\"note \"\"x\"\"\"\n",
                                     catalogs());
    EXPECT_EQ(table.lookup("liver")->snomed_display, "Liver structure, whole");
    EXPECT_EQ(table.entries().at("liver").notes, "note \"x\"");
    EXPECT_EQ(parse_mapping(serialize_mapping(table), catalogs()), table);
}

TEST(MappingTable, SerializeRoundTrip) {
    EXPECT_EQ(parse_mapping(serialize_mapping(v1_mapping()), catalogs()), v1_mapping());
}

TEST(Sctid, CheckDigitAndPartition) {
    for (auto code : {"10200004", "138875005", "404684003", "64572001", "78961009"}) {
        EXPECT_TRUE(is_valid_sctid(code)) << code;
    }
    EXPECT_FALSE(is_valid_sctid("10200005"));
    EXPECT_FALSE(is_valid_sctid("10200014"));  // description partition
    EXPECT_FALSE(is_valid_sctid("12345"));
    EXPECT_FALSE(is_valid_sctid("1020000X"));
}

TEST(Coverage, CompleteTable) {
    const auto r = coverage_report(v1_mapping(), catalogs().get(LabelSetId::v1_104));
    EXPECT_DOUBLE_EQ(r.mapped_fraction, 1.0);
    EXPECT_TRUE(r.unmapped_labels.empty());
    EXPECT_EQ(r.mapped_count(), 104u);
}

TEST(Coverage, FourMissingLabels) {
    const std::set<std::string> gone{"liver", "spleen", "brain", "urinary_bladder"};
    const auto table = parse_mapping(without(gone), catalogs());
    const auto r = coverage_report(table, catalogs().get(LabelSetId::v1_104));
    EXPECT_DOUBLE_EQ(r.mapped_fraction, 100.0 / 104.0);
    EXPECT_EQ(std::set<std::string>(r.unmapped_labels.begin(), r.unmapped_labels.end()), gone);
}

TEST(Coverage, CatalogMismatch) {
    try {
        coverage_report(v1_mapping(), catalogs().get(LabelSetId::v2_117));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::catalog_mismatch);
    }
}

TEST(Coverage, PartitionAndHistogramInvariants) {
    const auto table = parse_mapping(without({"liver", "aorta"}) + "liver,NOMAP,No equivalent,,5,\n", catalogs());
    const auto r = coverage_report(table, catalogs().get(LabelSetId::v1_104));
    std::set<std::string> mapped(r.mapped_labels.begin(), r.mapped_labels.end());
    for (const auto& l : r.unmapped_labels) {
        EXPECT_FALSE(mapped.count(l)) << l;
    }
    EXPECT_EQ(r.mapped_labels.size() + r.unmapped_labels.size(), 104u);
    EXPECT_EQ(std::accumulate(r.degree_histogram.begin(), r.degree_histogram.end(), std::size_t{0}), r.entry_count);
    EXPECT_EQ(r.degree_histogram[4], 1u);
}

TEST(MappingIntegrity, BundledCodesAreWellFormed) {
    std::set<std::string> labels;
    for (const auto& [label, e] : v1_mapping().entries()) {
        EXPECT_TRUE(labels.insert(label).second);
        EXPECT_GE(e.equivalence_degree, 1);
        EXPECT_LE(e.equivalence_degree, 5);
        if (!e.is_no_map()) {
            EXPECT_TRUE(is_valid_sctid(e.snomed_code)) << label;
        }
        EXPECT_TRUE(catalogs().get(LabelSetId::v1_104).contains(label));
    }
}

}  // namespace
}  // namespace ctindex::termmap
