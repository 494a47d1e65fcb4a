#pragma once

#include <cstdint>
#include <json.hpp>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctindex/fhir/resources.hpp"

namespace ctindex::fhir {

enum class Directive { create, conditional_create };

struct BundleEntry {
    std::string full_url;
    nlohmann::json resource;
    Directive directive = Directive::create;
    /// Resource type the POST targets.
    std::string url;
    /// `identifier=<system>|<value>`; empty for plain creates.
    std::string if_none_exist;

    friend bool operator==(const BundleEntry&, const BundleEntry&) = default;
};

struct TransactionBundle {
    std::vector<BundleEntry> entries;

    friend bool operator==(const TransactionBundle&, const TransactionBundle&) = default;
};

inline constexpr std::string_view kBundleExtension = ".fhir-bundle.json";

/// Patients, then Devices (each once, conditional create), then
/// ImagingStudy/BodyStructure/Provenance per series in input order.
/// References are rewritten to the entries' urn:uuid fullUrls.
TransactionBundle to_transaction_bundle(std::span<const ResourceSet> sets);

/// References in the bundle that no entry's fullUrl resolves.
std::vector<std::string> unresolved_references(const TransactionBundle& bundle);

/// 3 * series + patients + devices. Throws Errc::invalid_counts for
/// negative counts or patient_count > series_count.
std::int64_t unique_resource_count(std::int64_t series_count, std::int64_t patient_count,
                                   std::int64_t device_identity_count);

/// Canonical text: sorted object keys, 2-space indent, trailing newline.
std::string serialize_bundle(const TransactionBundle& bundle);
/// Errors: malformed_file, schema_violation.
TransactionBundle parse_bundle(std::string_view text);

/// One compact resource per line, for bulk loading.
std::string to_ndjson(const TransactionBundle& bundle);

}  // namespace ctindex::fhir
