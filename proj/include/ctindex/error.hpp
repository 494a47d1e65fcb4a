#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ctindex {

/// Machine-readable error categories shared by every module.
enum class Errc {
    malformed_file,
    schema_violation,
    unknown_label,
    series_mismatch,
    malformed_record,
    duplicate_series_uid,
    malformed_row,
    duplicate_label,
    bad_equivalence_degree,
    catalog_mismatch,
    unknown_label_set,
    label_set_mismatch,
    unmapped_label,
    rejected_modality,
    duplicate_active_task,
    unknown_task,
    invalid_state,
    config_invalid,
    empty_annotation_set,
    invalid_counts,
    invalid_document,
    malformed_query,
    corrupt_snapshot,
    io_error,
    not_found,
    invalid_argument,
};

/// Stable snake_case name, used on the wire and in CLI output.
std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message,
          std::optional<std::size_t> location = std::nullopt);

    [[nodiscard]] Errc code() const noexcept { return code_; }

    /// Line or row number for file-format errors (1-based).
    [[nodiscard]] std::optional<std::size_t> location() const noexcept { return location_; }

private:
    Errc code_;
    std::optional<std::size_t> location_;
};

}  // namespace ctindex
