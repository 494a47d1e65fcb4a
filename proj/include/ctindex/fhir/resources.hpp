#pragma once

#include <array>
#include <json.hpp>
#include <string>
#include <string_view>

#include "ctindex/annotate/annotate.hpp"
#include "ctindex/ingest/series.hpp"

namespace ctindex::fhir {

inline constexpr std::string_view kPatientIdentifierSystem = "urn:ct-indexer:patient-pseudonym";
inline constexpr std::string_view kStudyIdentifierSystem = "urn:ct-indexer:study-uid";
inline constexpr std::string_view kSeriesIdentifierSystem = "urn:ct-indexer:series-uid";
inline constexpr std::string_view kDeviceIdentifierSystem = "urn:ct-indexer:device-identity";
inline constexpr std::string_view kDicomModalitySystem = "http://dicom.nema.org/resources/ontology/DCM";

enum class ResourceType { Patient, ImagingStudy, BodyStructure, Device, Provenance };

std::string_view to_string(ResourceType type) noexcept;

/// Canonical profile URLs stamped into meta.profile.
struct ProfileSet {
    std::string patient;
    std::string imaging_study;
    std::string body_structure;
    std::string device;
    std::string provenance;

    static ProfileSet defaults();
    /// All five URLs under `base` + `ct-indexer-<resource>`.
    static ProfileSet with_base(std::string_view base);
};

/// Software versions behind one annotation, modeled as Device.version.
struct DeviceIdentity {
    std::string indexer_name;
    std::string indexer_version;
    std::string segmenter_name;
    std::string segmenter_version;
    std::string mapping_version;

    /// SHA-256 over all five fields.
    [[nodiscard]] std::string identity_key() const;

    friend bool operator==(const DeviceIdentity&, const DeviceIdentity&) = default;
};

struct Resource {
    ResourceType type = ResourceType::Patient;
    std::string id;
    /// Natural key the id was derived from; also the conditional-create
    /// identifier value for Patient and Device.
    std::string natural_key;
    nlohmann::json body;

    [[nodiscard]] std::string reference() const;

    friend bool operator==(const Resource&, const Resource&) = default;
};

/// The fixed five resources for one series.
struct ResourceSet {
    Resource patient;
    Resource imaging_study;
    Resource body_structure;
    Resource device;
    Resource provenance;

    [[nodiscard]] std::array<const Resource*, 5> all() const noexcept {
        return {&patient, &imaging_study, &body_structure, &device, &provenance};
    }

    friend bool operator==(const ResourceSet&, const ResourceSet&) = default;
};

/// Lowercase hex, 32 chars, of SHA-256(natural_key).
std::string resource_id(std::string_view natural_key);

/// Errors: empty_annotation_set, series_mismatch, invalid_argument (empty
/// device identity field).
ResourceSet build_resources(const annotate::AnnotationSet& annotations, const ingest::SeriesDescriptor& series,
                            const DeviceIdentity& device, const ProfileSet& profiles = ProfileSet::defaults());

}  // namespace ctindex::fhir
