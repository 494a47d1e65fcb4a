#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "ctindex/error.hpp"
#include "ctindex/text.hpp"
#include "ctindex/time.hpp"

namespace ctindex {
namespace {

TEST(IsoDate, ParsesAndFormats) {
    auto d = parse_iso_date("2003-02-28");
    ASSERT_TRUE(d);
    EXPECT_EQ(format_iso_date(*d), "2003-02-28");
    EXPECT_FALSE(parse_iso_date("2003-02-29"));
    EXPECT_TRUE(parse_iso_date("2004-02-29"));
    EXPECT_FALSE(parse_iso_date("2003-2-28"));
    EXPECT_FALSE(parse_iso_date("2003-02-28 "));
    EXPECT_FALSE(parse_iso_date(""));
}

TEST(IsoDate, DayNumbersRoundTrip) {
    EXPECT_EQ(to_day_number(*parse_iso_date("1970-01-01")), 0);
    EXPECT_EQ(to_day_number(*parse_iso_date("1969-12-31")), -1);
    for (std::int32_t n = -800; n < 30000; n += 97) {
        EXPECT_EQ(to_day_number(from_day_number(n)), n);
    }
}

TEST(Timestamp, MillisecondsOnlyWhenPresent) {
    const Timestamp t{std::chrono::sys_days{std::chrono::year{2024} / 3 / 1} + std::chrono::hours{5}};
    EXPECT_EQ(format_timestamp(t), "2024-03-01T05:00:00Z");
    EXPECT_EQ(format_timestamp(t + std::chrono::milliseconds{7}), "2024-03-01T05:00:00.007Z");
    EXPECT_EQ(parse_timestamp("2024-03-01T05:00:00Z"), t);
    EXPECT_EQ(parse_timestamp("2024-03-01T05:00:00.007Z"), t + std::chrono::milliseconds{7});
    EXPECT_FALSE(parse_timestamp("2024-03-01 05:00:00Z"));
    EXPECT_FALSE(parse_timestamp("2024-03-01T25:00:00Z"));
}

TEST(Text, Sha256KnownVectors) {
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Text, SemverAndLabels) {
    EXPECT_TRUE(is_semver("1.5.7"));
    EXPECT_TRUE(is_semver("2.0.0-rc.1+build.5"));
    EXPECT_FALSE(is_semver("1.5"));
    EXPECT_FALSE(is_semver("01.2.3"));
    EXPECT_TRUE(is_label("vertebrae_l1"));
    EXPECT_FALSE(is_label("Liver"));
    EXPECT_FALSE(is_label(""));
}

TEST(Text, FormatDoubleRoundTrips) {
    for (double v : {0.0, 1.0, -150.25, 1420000.0, 0.1, 1e-9, 123456789.123, 62.0}) {
        const auto s = format_double(v);
        EXPECT_EQ(std::stod(s), v) << s;
    }
}

TEST(Text, SplitKeepsEmptyFields) {
    auto parts = split("a||b|", '|');
    ASSERT_EQ(parts.size(), 4u);
    EXPECT_EQ(parts[1], "");
    EXPECT_EQ(parts[3], "");
    EXPECT_EQ(trim("  x \t"), "x");
}

TEST(ErrorCodes, NamesAreSnakeCase) {
    EXPECT_EQ(errc_name(Errc::duplicate_active_task), "duplicate_active_task");
    EXPECT_EQ(errc_name(Errc::corrupt_snapshot), "corrupt_snapshot");
    Error e(Errc::malformed_record, "bad", 7);
    EXPECT_EQ(e.code(), Errc::malformed_record);
    EXPECT_EQ(e.location(), 7u);
}

}  // namespace
}  // namespace ctindex
