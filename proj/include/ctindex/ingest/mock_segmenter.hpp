#pragma once

#include <cstdint>
#include <string>

#include "ctindex/ingest/label_catalog.hpp"
#include "ctindex/ingest/series.hpp"
#include "ctindex/ingest/statistics.hpp"

namespace ctindex::ingest {

enum class RegionModel {
    /// Window placed uniformly anywhere along the body axis.
    whole_body,
    /// Window overlaps the catalog region named by body_region_hint;
    /// falls back to whole_body when the hint is absent or unknown.
    hint,
};

struct MockCalibration {
    LabelSetId label_set_id = LabelSetId::v1_104;
    /// Expected number of emitted structures per series, clamped to
    /// [1, catalog size].
    double mean_structures = 37.0;
    RegionModel region_model = RegionModel::whole_body;
    /// Also emit every other catalog label with volume 0, as the real
    /// segmenter does.
    bool emit_absent_as_zero = false;
    std::string segmenter_name = "TotalSegmentator";
    std::string segmenter_version = "1.5.7";
};

/// Deterministic stand-in for the segmenter. Output depends only on
/// (series_uid, body_region_hint, seed, calibration, catalog).
///
/// The structure count is 1 + Binomial(N-1, (mean-1)/(N-1)) so its
/// expectation equals the calibrated mean exactly; the structures form a
/// contiguous run of the cranio-caudal catalog order.
SegmentationStatistics mock_segment(const SeriesDescriptor& series, std::uint64_t seed,
                                    const MockCalibration& calibration, const LabelCatalog& catalog);

/// Counter-based generator: value i is a pure function of (key, i).
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

    std::uint64_t next() noexcept;
    /// Uniform in [0, 1).
    double uniform() noexcept;
    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound) noexcept;

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace ctindex::ingest
