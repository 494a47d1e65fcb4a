#include "ctindex/ingest/synthetic.hpp"

#include <array>
#include <cstdio>
#include <string_view>

#include "ctindex/error.hpp"
#include "ctindex/ingest/mock_segmenter.hpp"

namespace ctindex::ingest {

std::vector<SeriesDescriptor> synthesize_series(const SynthOptions& options) {
    if (options.days <= 0) {
        throw Error(Errc::invalid_argument, "days must be positive");
    }
    static constexpr std::array<std::string_view, 5> kHints{"head", "neck", "thorax", "abdomen", "pelvis"};
    const std::size_t patients = options.patients == 0 ? options.count : options.patients;
    const std::int32_t first = to_day_number(options.first_date);
    CounterRng rng(options.seed ^ 0x5eed0f5e41e5ULL);

    std::vector<SeriesDescriptor> out;
    out.reserve(options.count);
    const std::string prefix = "2.25." + std::to_string(options.seed) + ".";
    for (std::size_t i = 0; i < options.count; ++i) {
        SeriesDescriptor s;
        s.series_uid = prefix + std::to_string(i + 1);
        s.study_uid = s.series_uid + ".0";
        char pseudonym[32];
        std::snprintf(pseudonym, sizeof pseudonym, "PSN-%06zu", i % patients + 1);
        s.patient_pseudonym = pseudonym;
        s.acquisition_date =
            from_day_number(first + static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(options.days))));
        s.modality = Modality::CT;
        s.source = options.source;
        const auto hint = rng.below(kHints.size());
        if (options.with_hints) {
            s.body_region_hint = std::string(kHints[hint]);
        }
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace ctindex::ingest
