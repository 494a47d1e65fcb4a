#include "ctindex/error.hpp"

namespace ctindex {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::malformed_file: return "malformed_file";
        case Errc::schema_violation: return "schema_violation";
        case Errc::unknown_label: return "unknown_label";
        case Errc::series_mismatch: return "series_mismatch";
        case Errc::malformed_record: return "malformed_record";
        case Errc::duplicate_series_uid: return "duplicate_series_uid";
        case Errc::malformed_row: return "malformed_row";
        case Errc::duplicate_label: return "duplicate_label";
        case Errc::bad_equivalence_degree: return "bad_equivalence_degree";
        case Errc::catalog_mismatch: return "catalog_mismatch";
        case Errc::unknown_label_set: return "unknown_label_set";
        case Errc::label_set_mismatch: return "label_set_mismatch";
        case Errc::unmapped_label: return "unmapped_label";
        case Errc::rejected_modality: return "rejected_modality";
        case Errc::duplicate_active_task: return "duplicate_active_task";
        case Errc::unknown_task: return "unknown_task";
        case Errc::invalid_state: return "invalid_state";
        case Errc::config_invalid: return "config_invalid";
        case Errc::empty_annotation_set: return "empty_annotation_set";
        case Errc::invalid_counts: return "invalid_counts";
        case Errc::invalid_document: return "invalid_document";
        case Errc::malformed_query: return "malformed_query";
        case Errc::corrupt_snapshot: return "corrupt_snapshot";
        case Errc::io_error: return "io_error";
        case Errc::not_found: return "not_found";
        case Errc::invalid_argument: return "invalid_argument";
    }
    return "unknown";
}

namespace {

std::string with_location(const std::string& message, std::optional<std::size_t> location) {
    if (!location) {
        return message;
    }
    return "line " + std::to_string(*location) + ": " + message;
}

}  // namespace

Error::Error(Errc code, const std::string& message, std::optional<std::size_t> location)
    : std::runtime_error(with_location(message, location)), code_(code), location_(location) {}

}  // namespace ctindex
