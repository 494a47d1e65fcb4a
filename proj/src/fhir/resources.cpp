#include "ctindex/fhir/resources.hpp"

#include "ctindex/error.hpp"
#include "ctindex/termmap/mapping.hpp"
#include "ctindex/text.hpp"

namespace ctindex::fhir {

using nlohmann::json;

std::string_view to_string(ResourceType type) noexcept {
    switch (type) {
        case ResourceType::Patient: return "Patient";
        case ResourceType::ImagingStudy: return "ImagingStudy";
        case ResourceType::BodyStructure: return "BodyStructure";
        case ResourceType::Device: return "Device";
        case ResourceType::Provenance: return "Provenance";
    }
    return "Patient";
}

ProfileSet ProfileSet::with_base(std::string_view base) {
    std::string b(base);
    if (!b.empty() && b.back() != '/') {
        b.push_back('/');
    }
    return {b + "ct-indexer-patient", b + "ct-indexer-imagingstudy", b + "ct-indexer-bodystructure",
            b + "ct-indexer-device", b + "ct-indexer-provenance"};
}

ProfileSet ProfileSet::defaults() { return with_base("https://fhir.ct-indexer.org/StructureDefinition/"); }

std::string DeviceIdentity::identity_key() const {
    std::string joined;
    for (const auto* part : {&indexer_name, &indexer_version, &segmenter_name, &segmenter_version, &mapping_version}) {
        joined += *part;
        joined.push_back('\x1f');
    }
    return sha256_hex(joined);
}

std::string Resource::reference() const { return std::string(to_string(type)) + "/" + id; }

std::string resource_id(std::string_view natural_key) { return sha256_hex(natural_key).substr(0, 32); }

namespace {

Resource make_resource(ResourceType type, std::string natural_key, const std::string& profile) {
    Resource r;
    r.type = type;
    r.id = resource_id(natural_key);
    r.natural_key = std::move(natural_key);
    r.body = json{{"resourceType", std::string(to_string(type))},
                  {"id", r.id},
                  {"meta", {{"profile", json::array({profile})}}}};
    return r;
}

json identifier(std::string_view system, const std::string& value) {
    return json::array({json{{"system", std::string(system)}, {"value", value}}});
}

json modality_coding(ingest::Modality modality) {
    return json{{"coding", json::array({json{{"system", std::string(kDicomModalitySystem)},
                                              {"code", std::string(to_string(modality))}}})}};
}

}  // namespace

ResourceSet build_resources(const annotate::AnnotationSet& annotations, const ingest::SeriesDescriptor& series,
                            const DeviceIdentity& device, const ProfileSet& profiles) {
    if (annotations.annotations.empty()) {
        throw Error(Errc::empty_annotation_set, "series '" + annotations.series_uid + "' has no annotations");
    }
    if (annotations.series_uid != series.series_uid) {
        throw Error(Errc::series_mismatch, "annotation set is for '" + annotations.series_uid + "', descriptor for '" +
                                               series.series_uid + "'");
    }
    for (const auto* part : {&device.indexer_name, &device.indexer_version, &device.segmenter_name,
                             &device.segmenter_version, &device.mapping_version}) {
        if (part->empty()) {
            throw Error(Errc::invalid_argument, "device identity fields must be non-empty");
        }
    }

    ResourceSet set;

    set.patient = make_resource(ResourceType::Patient, series.patient_pseudonym, profiles.patient);
    set.patient.body["identifier"] = identifier(kPatientIdentifierSystem, series.patient_pseudonym);

    set.imaging_study = make_resource(ResourceType::ImagingStudy, series.series_uid, profiles.imaging_study);
    {
        auto& b = set.imaging_study.body;
        b["identifier"] = identifier(kStudyIdentifierSystem, series.study_uid);
        b["status"] = "available";
        b["modality"] = json::array({modality_coding(series.modality)});
        b["subject"] = {{"reference", set.patient.reference()}};
        b["started"] = format_iso_date(series.acquisition_date);
        b["numberOfSeries"] = 1;
        json s{{"uid", series.series_uid}, {"modality", modality_coding(series.modality)}};
        if (series.body_region_hint) {
            s["description"] = *series.body_region_hint;
        }
        b["series"] = json::array({std::move(s)});
    }

    set.body_structure = make_resource(ResourceType::BodyStructure, series.series_uid + "bs", profiles.body_structure);
    {
        auto& b = set.body_structure.body;
        b["identifier"] = identifier(kSeriesIdentifierSystem, series.series_uid);
        b["description"] = "Anatomical structures segmented in CT series " + series.series_uid;
        json included = json::array();
        for (const auto& a : annotations.annotations) {
            included.push_back({{"structure",
                                 {{"coding", json::array({json{{"system", std::string(termmap::kSnomedSystem)},
                                                               {"code", a.snomed_code},
                                                               {"display", a.snomed_display}}})}}}});
        }
        b["includedStructure"] = std::move(included);
        b["patient"] = {{"reference", set.patient.reference()}};
    }

    const auto key = device.identity_key();
    set.device = make_resource(ResourceType::Device, key, profiles.device);
    {
        auto& b = set.device.body;
        b["identifier"] = identifier(kDeviceIdentifierSystem, key);
        b["displayName"] = device.indexer_name;
        b["version"] = json::array({
            json{{"type", {{"text", device.indexer_name}}}, {"value", device.indexer_version}},
            json{{"type", {{"text", device.segmenter_name}}}, {"value", device.segmenter_version}},
            json{{"type", {{"text", "label-mapping"}}}, {"value", device.mapping_version}},
        });
    }

    set.provenance = make_resource(ResourceType::Provenance, series.series_uid + "prov", profiles.provenance);
    {
        auto& b = set.provenance.body;
        b["target"] = json::array({json{{"reference", set.body_structure.reference()}}});
        b["recorded"] = format_timestamp(annotations.created_at);
        b["agent"] = json::array({json{
            {"type",
             {{"coding", json::array({json{{"system", "http://terminology.hl7.org/CodeSystem/provenance-participant-type"},
                                           {"code", "assembler"}}})}}},
            {"who", {{"reference", set.device.reference()}}}}});
    }
    return set;
}

}  // namespace ctindex::fhir
