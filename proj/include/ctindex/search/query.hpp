#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctindex/time.hpp"

namespace ctindex::search {

enum class QueryKind {
    match_all,
    has_code,
    volume_in_range,
    intensity_in_range,
    date_in_range,
    patient_is,
    all_of,
    any_of,
    negate,
};

inline constexpr std::size_t kMaxQueryDepth = 32;

/// Query AST. Volume and intensity ranges are scoped to `value` (a SNOMED
/// code): they match when some annotation with that code is in range.
/// Bounds are inclusive; an absent bound is open.
struct Query {
    QueryKind kind = QueryKind::match_all;
    /// Code for has_code and range predicates; pseudonym for patient_is.
    std::string value;
    std::optional<double> min;
    std::optional<double> max;
    std::optional<Date> date_min;
    std::optional<Date> date_max;
    std::vector<Query> children;

    static Query match_all();
    static Query has_code(std::string code);
    static Query volume_in_range(std::string code, std::optional<double> min, std::optional<double> max);
    static Query intensity_in_range(std::string code, std::optional<double> min, std::optional<double> max);
    static Query date_in_range(std::optional<Date> min, std::optional<Date> max);
    static Query patient_is(std::string pseudonym);
    static Query all_of(std::vector<Query> children);
    static Query any_of(std::vector<Query> children);
    static Query negate(Query child);

    friend bool operator==(const Query&, const Query&) = default;
};

/// Leaves have depth 1.
std::size_t depth(const Query& q) noexcept;

/// Errors: malformed_query (bad arity, min > max, non-finite bound,
/// empty code or pseudonym, depth above kMaxQueryDepth).
void validate(const Query& q);

/// Text wire form. Grammar:
///
///   query   := "all" | code | range | date | patient | "and(" list ")"
///            | "or(" list ")" | "not(" query ")"
///   code    := "code:" DIGITS
///   range   := ("vol:" | "int:") DIGITS ":[" NUMBER? "," NUMBER? "]"
///   date    := "date:[" ISO_DATE? "," ISO_DATE? "]"
///   patient := "patient:" (TOKEN | QUOTED)
///   list    := query ("," query)*
///
/// Whitespace is allowed between tokens. TOKEN is `[A-Za-z0-9._-]+`;
/// QUOTED is a double-quoted string with `\"` and `\\` escapes.
/// Errors: malformed_query, with the byte offset in the message.
Query parse_query(std::string_view text);

/// Canonical text; parse_query(to_text(q)) == q for every valid q.
std::string to_text(const Query& q);

}  // namespace ctindex::search
