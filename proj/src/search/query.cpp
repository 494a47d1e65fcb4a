#include "ctindex/search/query.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "ctindex/error.hpp"
#include "ctindex/text.hpp"

namespace ctindex::search {

Query Query::match_all() { return Query{}; }

Query Query::has_code(std::string code) {
    Query q;
    q.kind = QueryKind::has_code;
    q.value = std::move(code);
    return q;
}

Query Query::volume_in_range(std::string code, std::optional<double> min, std::optional<double> max) {
    Query q;
    q.kind = QueryKind::volume_in_range;
    q.value = std::move(code);
    q.min = min;
    q.max = max;
    return q;
}

Query Query::intensity_in_range(std::string code, std::optional<double> min, std::optional<double> max) {
    Query q = volume_in_range(std::move(code), min, max);
    q.kind = QueryKind::intensity_in_range;
    return q;
}

Query Query::date_in_range(std::optional<Date> min, std::optional<Date> max) {
    Query q;
    q.kind = QueryKind::date_in_range;
    q.date_min = min;
    q.date_max = max;
    return q;
}

Query Query::patient_is(std::string pseudonym) {
    Query q;
    q.kind = QueryKind::patient_is;
    q.value = std::move(pseudonym);
    return q;
}

Query Query::all_of(std::vector<Query> children) {
    Query q;
    q.kind = QueryKind::all_of;
    q.children = std::move(children);
    return q;
}

Query Query::any_of(std::vector<Query> children) {
    Query q;
    q.kind = QueryKind::any_of;
    q.children = std::move(children);
    return q;
}

Query Query::negate(Query child) {
    Query q;
    q.kind = QueryKind::negate;
    q.children.push_back(std::move(child));
    return q;
}

std::size_t depth(const Query& q) noexcept {
    std::size_t deepest = 0;
    for (const auto& c : q.children) {
        deepest = std::max(deepest, depth(c));
    }
    return deepest + 1;
}

namespace {

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

bool is_token_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '.' || c == '_' || c == '-';
}

[[noreturn]] void malformed(const std::string& message) { throw Error(Errc::malformed_query, message); }

void validate_at(const Query& q, std::size_t level) {
    if (level > kMaxQueryDepth) {
        malformed("query deeper than " + std::to_string(kMaxQueryDepth));
    }
    switch (q.kind) {
        case QueryKind::match_all:
            break;
        case QueryKind::has_code:
            if (!all_digits(q.value)) {
                malformed("code must be a non-empty digit string");
            }
            break;
        case QueryKind::volume_in_range:
        case QueryKind::intensity_in_range:
            if (!all_digits(q.value)) {
                malformed("code must be a non-empty digit string");
            }
            if ((q.min && !std::isfinite(*q.min)) || (q.max && !std::isfinite(*q.max))) {
                malformed("range bounds must be finite");
            }
            if (q.min && q.max && *q.min > *q.max) {
                malformed("range min exceeds max");
            }
            break;
        case QueryKind::date_in_range:
            if ((q.date_min && !q.date_min->ok()) || (q.date_max && !q.date_max->ok())) {
                malformed("invalid date bound");
            }
            if (q.date_min && q.date_max && *q.date_min > *q.date_max) {
                malformed("date range min exceeds max");
            }
            break;
        case QueryKind::patient_is:
            if (q.value.empty()) {
                malformed("patient pseudonym must not be empty");
            }
            break;
        case QueryKind::all_of:
        case QueryKind::any_of:
            if (q.children.empty()) {
                malformed("and/or need at least one operand");
            }
            break;
        case QueryKind::negate:
            if (q.children.size() != 1) {
                malformed("not takes exactly one operand");
            }
            break;
    }
    const bool composite =
        q.kind == QueryKind::all_of || q.kind == QueryKind::any_of || q.kind == QueryKind::negate;
    if (!composite && !q.children.empty()) {
        malformed("predicate cannot have operands");
    }
    for (const auto& c : q.children) {
        validate_at(c, level + 1);
    }
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Query parse() {
        Query q = query(1);
        skip_ws();
        if (pos_ != text_.size()) {
            fail("unexpected trailing input");
        }
        return q;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        malformed(what + " at offset " + std::to_string(pos_));
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])) != 0) {
            ++pos_;
        }
    }

    bool consume(std::string_view s) {
        skip_ws();
        if (text_.substr(pos_, s.size()) == s) {
            pos_ += s.size();
            return true;
        }
        return false;
    }

    void expect(std::string_view s) {
        if (!consume(s)) {
            fail("expected '" + std::string(s) + "'");
        }
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    std::string_view take_while(bool (*pred)(char)) {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && pred(text_[pos_])) {
            ++pos_;
        }
        return text_.substr(start, pos_ - start);
    }

    std::string code() {
        skip_ws();
        auto digits = take_while([](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; });
        if (digits.empty()) {
            fail("expected a concept code");
        }
        return std::string(digits);
    }

    std::optional<double> number() {
        skip_ws();
        auto tok = take_while([](char c) {
            return std::isdigit(static_cast<unsigned char>(c)) != 0 || c == '.' || c == '-' || c == '+' ||
                   c == 'e' || c == 'E';
        });
        if (tok.empty()) {
            return std::nullopt;
        }
        if (tok.front() == '+') {
            tok.remove_prefix(1);
        }
        double value = 0.0;
        auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
        if (ec != std::errc{} || end != tok.data() + tok.size() || !std::isfinite(value)) {
            fail("invalid number '" + std::string(tok) + "'");
        }
        return value;
    }

    std::optional<Date> date() {
        skip_ws();
        auto tok = take_while([](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0 || c == '-'; });
        if (tok.empty()) {
            return std::nullopt;
        }
        auto d = parse_iso_date(tok);
        if (!d) {
            fail("invalid date '" + std::string(tok) + "'");
        }
        return d;
    }

    std::string pseudonym() {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '"') {
            ++pos_;
            std::string out;
            while (pos_ < text_.size() && text_[pos_] != '"') {
                char c = text_[pos_++];
                if (c == '\\') {
                    if (pos_ >= text_.size() || (text_[pos_] != '"' && text_[pos_] != '\\')) {
                        fail("invalid escape in quoted string");
                    }
                    c = text_[pos_++];
                }
                out.push_back(c);
            }
            if (pos_ >= text_.size()) {
                fail("unterminated quoted string");
            }
            ++pos_;
            return out;
        }
        auto tok = take_while(is_token_char);
        if (tok.empty()) {
            fail("expected a patient pseudonym");
        }
        return std::string(tok);
    }

    std::vector<Query> list(std::size_t level) {
        std::vector<Query> out;
        out.push_back(query(level));
        while (consume(",")) {
            out.push_back(query(level));
        }
        expect(")");
        return out;
    }

    template <typename Bound, typename Read>
    std::pair<std::optional<Bound>, std::optional<Bound>> bounds(Read read) {
        expect("[");
        auto lo = read();
        expect(",");
        auto hi = read();
        expect("]");
        return {lo, hi};
    }

    Query query(std::size_t level) {
        if (level > kMaxQueryDepth) {
            fail("query deeper than " + std::to_string(kMaxQueryDepth));
        }
        skip_ws();
        if (consume("and(")) {
            return Query::all_of(list(level + 1));
        }
        if (consume("or(")) {
            return Query::any_of(list(level + 1));
        }
        if (consume("not(")) {
            Query child = query(level + 1);
            expect(")");
            return Query::negate(std::move(child));
        }
        if (consume("code:")) {
            return Query::has_code(code());
        }
        const bool vol = consume("vol:");
        if (vol || consume("int:")) {
            std::string c = code();
            expect(":");
            auto [lo, hi] = bounds<double>([this] { return number(); });
            if (lo && hi && *lo > *hi) {
                fail("range min exceeds max");
            }
            return vol ? Query::volume_in_range(std::move(c), lo, hi)
                       : Query::intensity_in_range(std::move(c), lo, hi);
        }
        if (consume("date:")) {
            auto [lo, hi] = bounds<Date>([this] { return date(); });
            if (lo && hi && *lo > *hi) {
                fail("date range min exceeds max");
            }
            return Query::date_in_range(lo, hi);
        }
        if (consume("patient:")) {
            return Query::patient_is(pseudonym());
        }
        if (consume("all")) {
            return Query::match_all();
        }
        fail(pos_ >= text_.size() ? "unexpected end of query" : "unknown predicate");
    }
};

// Integral bounds print without an exponent, so 1e6 reads "1000000".
std::string format_bound(double v) {
    if (v == std::trunc(v) && std::fabs(v) < 1e15) {
        char buf[32];
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 0);
        if (ec == std::errc{}) {
            return std::string(buf, end);
        }
    }
    return format_double(v);
}

void print(const Query& q, std::string& out) {
    auto bound = [&out](const std::optional<double>& v) {
        if (v) {
            out += format_bound(*v);
        }
    };
    auto date_bound = [&out](const std::optional<Date>& d) {
        if (d) {
            out += format_iso_date(*d);
        }
    };
    auto children = [&out, &q](std::string_view head) {
        out += head;
        for (std::size_t i = 0; i < q.children.size(); ++i) {
            if (i > 0) {
                out += ',';
            }
            print(q.children[i], out);
        }
        out += ')';
    };
    switch (q.kind) {
        case QueryKind::match_all:
            out += "all";
            break;
        case QueryKind::has_code:
            out += "code:" + q.value;
            break;
        case QueryKind::volume_in_range:
        case QueryKind::intensity_in_range:
            out += q.kind == QueryKind::volume_in_range ? "vol:" : "int:";
            out += q.value + ":[";
            bound(q.min);
            out += ',';
            bound(q.max);
            out += ']';
            break;
        case QueryKind::date_in_range:
            out += "date:[";
            date_bound(q.date_min);
            out += ',';
            date_bound(q.date_max);
            out += ']';
            break;
        case QueryKind::patient_is:
            out += "patient:";
            if (std::all_of(q.value.begin(), q.value.end(), is_token_char) && !q.value.empty()) {
                out += q.value;
            } else {
                out += '"';
                for (char c : q.value) {
                    if (c == '"' || c == '\\') {
                        out += '\\';
                    }
                    out += c;
                }
                out += '"';
            }
            break;
        case QueryKind::all_of:
            children("and(");
            break;
        case QueryKind::any_of:
            children("or(");
            break;
        case QueryKind::negate:
            children("not(");
            break;
    }
}

}  // namespace

void validate(const Query& q) { validate_at(q, 1); }

Query parse_query(std::string_view text) {
    Query q = Parser(text).parse();
    validate(q);
    return q;
}

std::string to_text(const Query& q) {
    std::string out;
    print(q, out);
    return out;
}

}  // namespace ctindex::search
