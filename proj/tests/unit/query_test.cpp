#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "../support/query_oracle.hpp"
#include "ctindex/error.hpp"
#include "ctindex/search/query.hpp"

namespace ctindex::search {
namespace {

Date day(std::string_view iso) { return *parse_iso_date(iso); }

Errc error_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return Errc::invalid_argument;
}

Query nested_not(std::size_t depth) {
    Query q = Query::has_code("10200004");
    for (std::size_t i = 1; i < depth; ++i) {
        q = Query::negate(std::move(q));
    }
    return q;
}

TEST(QueryParse, Leaves) {
    EXPECT_EQ(parse_query("all"), Query::match_all());
    EXPECT_EQ(parse_query("code:10200004"), Query::has_code("10200004"));
    EXPECT_EQ(parse_query("vol:10200004:[1000000,]"), Query::volume_in_range("10200004", 1e6, std::nullopt));
    EXPECT_EQ(parse_query("int:78961009:[,60.5]"), Query::intensity_in_range("78961009", std::nullopt, 60.5));
    EXPECT_EQ(parse_query("vol:1:[-2.5e1,3]"), Query::volume_in_range("1", -25.0, 3.0));
    EXPECT_EQ(parse_query("date:[2020-01-01,2020-12-31]"),
              Query::date_in_range(day("2020-01-01"), day("2020-12-31")));
    EXPECT_EQ(parse_query("date:[,]"), Query::date_in_range(std::nullopt, std::nullopt));
    EXPECT_EQ(parse_query("patient:PSN-000123"), Query::patient_is("PSN-000123"));
    EXPECT_EQ(parse_query(R"(patient:"a \"b\" \\ c")"), Query::patient_is(R"(a "b" \ c)"));
}

TEST(QueryParse, CompoundsAndWhitespace) {
    const auto q = parse_query(" and( code:10200004 , or(patient:A, not( date:[2020-01-01,] )) ) ");
    const auto expected = Query::all_of(
        {Query::has_code("10200004"),
         Query::any_of({Query::patient_is("A"), Query::negate(Query::date_in_range(day("2020-01-01"), std::nullopt))})});
    EXPECT_EQ(q, expected);
    EXPECT_EQ(depth(q), 4u);
    EXPECT_EQ(depth(Query::match_all()), 1u);
    EXPECT_EQ(to_text(q), "and(code:10200004,or(patient:A,not(date:[2020-01-01,])))");
}

TEST(QueryParse, IntegralBoundsPrintPlain) {
    EXPECT_EQ(to_text(Query::volume_in_range("1", 1e6, 2500000.0)), "vol:1:[1000000,2500000]");
    EXPECT_EQ(to_text(Query::intensity_in_range("1", -40.0, std::nullopt)), "int:1:[-40,]");
    const auto q = Query::volume_in_range("1", 0.1, 1.0 / 3.0);
    EXPECT_EQ(parse_query(to_text(q)), q);
}

TEST(QueryParse, Errors) {
    for (const char* text : {"", "al", "allx", "code:", "code:12a", "code:-1", "vol:1:[2,1]", "vol:1:[a,]",
                             "vol:1:[1,2", "vol::[1,2]", "vol:1:[nan,]", "vol:1:[inf,]", "date:[2020-13-01,]",
                             "date:[2021-01-01,2020-01-01]", "patient:", "patient:\"open", "patient:a b",
                             "and()", "or()", "not()", "not(all,all)", "and(all,)", "and(all", "xor(all)",
                             "all all", "code:1)"}) {
        EXPECT_EQ(error_of([&] { parse_query(text); }), Errc::malformed_query) << text;
    }
    try {
        parse_query("and(all, bogus)");
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("9"), std::string::npos) << e.what();
    }
}

TEST(QueryValidate, DepthLimit) {
    EXPECT_NO_THROW(validate(nested_not(kMaxQueryDepth)));
    EXPECT_EQ(error_of([] { validate(nested_not(kMaxQueryDepth + 1)); }), Errc::malformed_query);
    EXPECT_NO_THROW(parse_query(to_text(nested_not(32))));
    EXPECT_EQ(error_of([] { parse_query(to_text(nested_not(33))); }), Errc::malformed_query);
    // Very deep input fails cleanly instead of exhausting the stack.
    std::string deep;
    for (int i = 0; i < 100000; ++i) {
        deep += "not(";
    }
    EXPECT_EQ(error_of([&] { parse_query(deep); }), Errc::malformed_query);
}

TEST(QueryValidate, StructuralRules) {
    EXPECT_EQ(error_of([] { validate(Query::all_of({})); }), Errc::malformed_query);
    EXPECT_EQ(error_of([] { validate(Query::has_code("")); }), Errc::malformed_query);
    EXPECT_EQ(error_of([] { validate(Query::patient_is("")); }), Errc::malformed_query);
    EXPECT_EQ(error_of([] { validate(Query::volume_in_range("1", 5.0, 4.0)); }), Errc::malformed_query);
    EXPECT_EQ(error_of([] { validate(Query::volume_in_range("1", std::numeric_limits<double>::infinity(), {})); }),
              Errc::malformed_query);
    EXPECT_NO_THROW(validate(Query::volume_in_range("1", 4.0, 4.0)));
}

TEST(QueryText, RandomRoundTrip) {
    std::mt19937_64 rng(21);
    const auto corpus = testing::random_corpus(rng, {50, 10, 10});
    for (int i = 0; i < 2000; ++i) {
        const auto q = testing::random_query(rng, corpus, 8);
        const auto text = to_text(q);
        ASSERT_EQ(parse_query(text), q) << text;
    }
}

TEST(QueryText, QuotedPatientRoundTrip) {
    for (const std::string p : {"plain", "with space", "quote\"inside", "back\\slash", "comma,paren)", "ü"}) {
        const auto q = Query::patient_is(p);
        EXPECT_EQ(parse_query(to_text(q)), q) << to_text(q);
    }
}

}  // namespace
}  // namespace ctindex::search
