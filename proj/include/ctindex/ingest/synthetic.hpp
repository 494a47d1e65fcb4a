#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ctindex/ingest/series.hpp"

namespace ctindex::ingest {

/// Deterministic series descriptors for demos and load tests.
struct SynthOptions {
    std::size_t count = 100;
    std::uint64_t seed = 1;
    /// Series are spread round-robin over this many pseudonyms; 0 means
    /// one patient per series.
    std::size_t patients = 0;
    Date first_date = std::chrono::year{2015} / 1 / 1;
    /// Acquisition dates are drawn from [first_date, first_date + days).
    std::int32_t days = 3650;
    Source source = Source::daily;
    /// Attach a body-region hint to every series.
    bool with_hints = true;
};

/// Uids are `2.25.<seed>.<n>` (series) and `2.25.<seed>.<n>.0` (study).
std::vector<SeriesDescriptor> synthesize_series(const SynthOptions& options);

}  // namespace ctindex::ingest
