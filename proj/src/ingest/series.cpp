#include "ctindex/ingest/series.hpp"

#include <array>
#include <utility>

namespace ctindex::ingest {

namespace {

constexpr std::array<std::pair<Modality, std::string_view>, 10> kModalities{{
    {Modality::CT, "CT"},
    {Modality::MR, "MR"},
    {Modality::CR, "CR"},
    {Modality::DX, "DX"},
    {Modality::US, "US"},
    {Modality::PT, "PT"},
    {Modality::NM, "NM"},
    {Modality::XA, "XA"},
    {Modality::MG, "MG"},
    {Modality::OT, "OT"},
}};

}  // namespace

std::string_view to_string(Modality m) noexcept {
    for (const auto& [value, name] : kModalities) {
        if (value == m) {
            return name;
        }
    }
    return "OT";
}

std::optional<Modality> parse_modality(std::string_view text) noexcept {
    for (const auto& [value, name] : kModalities) {
        if (name == text) {
            return value;
        }
    }
    return std::nullopt;
}

std::string_view to_string(Source s) noexcept { return s == Source::daily ? "daily" : "legacy"; }

std::optional<Source> parse_source(std::string_view text) noexcept {
    if (text == "daily") {
        return Source::daily;
    }
    if (text == "legacy") {
        return Source::legacy;
    }
    return std::nullopt;
}

}  // namespace ctindex::ingest
