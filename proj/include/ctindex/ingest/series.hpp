#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "ctindex/time.hpp"

namespace ctindex::ingest {

enum class Modality { CT, MR, CR, DX, US, PT, NM, XA, MG, OT };
enum class Source { daily, legacy };

std::string_view to_string(Modality m) noexcept;
std::optional<Modality> parse_modality(std::string_view text) noexcept;
std::string_view to_string(Source s) noexcept;
std::optional<Source> parse_source(std::string_view text) noexcept;

struct SeriesDescriptor {
    std::string series_uid;
    std::string study_uid;
    std::string patient_pseudonym;
    Date acquisition_date{};
    Modality modality = Modality::CT;
    std::optional<std::string> body_region_hint;
    Source source = Source::daily;

    friend bool operator==(const SeriesDescriptor&, const SeriesDescriptor&) = default;
};

}  // namespace ctindex::ingest
