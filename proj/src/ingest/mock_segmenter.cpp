#include "ctindex/ingest/mock_segmenter.hpp"

#include <algorithm>
#include <cmath>

#include "ctindex/text.hpp"

namespace ctindex::ingest {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double round_to(double value, double step) { return std::round(value / step) * step; }

// Per-label anatomy independent of the series: log-uniform nominal
// volume in [1e3, 1e6] mm^3 and a nominal density in [-150, 350].
struct Nominal {
    double volume_mm3;
    double intensity;
};

Nominal nominal_for(const std::string& label) {
    CounterRng rng(fnv1a64(label));
    const double volume = std::pow(10.0, 3.0 + 3.0 * rng.uniform());
    const double intensity = -150.0 + 500.0 * rng.uniform();
    return {volume, intensity};
}

}  // namespace

std::uint64_t CounterRng::next() noexcept { return splitmix64(key_ + (counter_++) * kGolden); }

double CounterRng::uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t CounterRng::below(std::uint64_t bound) noexcept {
    if (bound <= 1) {
        return 0;
    }
    // Rejection sampling keeps the draw exactly uniform.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    for (;;) {
        const auto v = next();
        if (v < limit) {
            return v % bound;
        }
    }
}

SegmentationStatistics mock_segment(const SeriesDescriptor& series, std::uint64_t seed,
                                    const MockCalibration& calibration, const LabelCatalog& catalog) {
    SegmentationStatistics stats;
    stats.series_uid = series.series_uid;
    stats.segmenter_name = calibration.segmenter_name;
    stats.segmenter_version = calibration.segmenter_version;
    stats.label_set_id = calibration.label_set_id;

    const auto& labels = catalog.labels();
    const std::size_t n = labels.size();
    if (n == 0) {
        return stats;
    }

    CounterRng rng(splitmix64(seed) ^ fnv1a64(series.series_uid));

    const double mean = std::clamp(calibration.mean_structures, 1.0, static_cast<double>(n));
    const double p = n > 1 ? (mean - 1.0) / static_cast<double>(n - 1) : 0.0;
    std::size_t count = 1;
    for (std::size_t i = 1; i < n; ++i) {
        if (rng.uniform() < p) {
            ++count;
        }
    }

    std::size_t lo_start = 0;
    std::size_t hi_start = n - count;
    if (calibration.region_model == RegionModel::hint && series.body_region_hint) {
        std::optional<std::size_t> first;
        std::size_t last = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (labels[i].region == *series.body_region_hint) {
                if (!first) {
                    first = i;
                }
                last = i;
            }
        }
        if (first) {
            lo_start = *first + 1 >= count ? *first + 1 - count : 0;
            hi_start = std::min(hi_start, last);
            lo_start = std::min(lo_start, hi_start);
        }
    }
    const std::size_t start = lo_start + rng.below(hi_start - lo_start + 1);

    for (std::size_t i = 0; i < n; ++i) {
        // Draws happen for every label so a label's values do not depend
        // on the window position.
        const double volume_factor = 0.8 + 0.4 * rng.uniform();
        const double intensity_noise = -15.0 + 30.0 * rng.uniform();
        const bool inside = i >= start && i < start + count;
        if (!inside && !calibration.emit_absent_as_zero) {
            continue;
        }
        StructureStat s;
        s.label = labels[i].label;
        if (inside) {
            const auto nominal = nominal_for(s.label);
            s.volume_mm3 = std::max(0.1, round_to(nominal.volume_mm3 * volume_factor, 0.1));
            s.mean_intensity = round_to(nominal.intensity + intensity_noise, 0.01);
        }
        stats.structures.push_back(std::move(s));
    }
    return stats;
}

}  // namespace ctindex::ingest
