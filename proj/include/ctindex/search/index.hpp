#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ctindex/annotate/annotate.hpp"
#include "ctindex/ingest/series.hpp"
#include "ctindex/search/query.hpp"
#include "ctindex/time.hpp"

namespace ctindex::search {

struct IndexedAnnotation {
    std::string snomed_code;
    std::optional<std::string> radlex_id;
    double volume_mm3 = 0.0;
    double mean_intensity = 0.0;

    friend bool operator==(const IndexedAnnotation&, const IndexedAnnotation&) = default;
};

struct IndexDocument {
    std::string series_uid;
    std::string patient_pseudonym;
    Date acquisition_date{};
    std::vector<IndexedAnnotation> annotations;
    std::string indexer_version;
    std::string mapping_version;

    friend bool operator==(const IndexDocument&, const IndexDocument&) = default;
};

/// Errors: series_mismatch if the set and descriptor disagree on the uid.
IndexDocument make_index_document(const annotate::AnnotationSet& set, const ingest::SeriesDescriptor& series);

/// Errors: invalid_document.
void validate_document(const IndexDocument& doc);

inline constexpr std::size_t kMaxPageLimit = 10000;

struct Page {
    std::size_t offset = 0;
    std::size_t limit = 50;
};

struct SearchResult {
    std::size_t total = 0;
    /// Ordered by acquisition date descending, then series uid ascending.
    std::vector<std::string> hits;

    friend bool operator==(const SearchResult&, const SearchResult&) = default;
};

/// Embedded inverted index. Readers share a lock; every write is applied
/// under the exclusive lock, so a search never observes a partial document.
class SearchIndex {
public:
    SearchIndex() = default;
    SearchIndex(const SearchIndex&) = delete;
    SearchIndex& operator=(const SearchIndex&) = delete;
    SearchIndex(SearchIndex&& other) noexcept;
    SearchIndex& operator=(SearchIndex&& other) noexcept;
    ~SearchIndex() = default;

    /// Replaces any previous document with the same series uid.
    /// Errors: invalid_document.
    void index_document(IndexDocument doc);
    bool remove(std::string_view series_uid);

    /// Errors: malformed_query; invalid_argument if page.limit exceeds
    /// kMaxPageLimit.
    SearchResult search(const Query& q, Page page = {}) const;

    std::optional<IndexDocument> get(std::string_view series_uid) const;
    std::size_t size() const;
    /// Live documents sorted by series uid.
    std::vector<IndexDocument> documents() const;

    /// Binary snapshot: magic, format version, payload length, payload and
    /// a SHA-256 over the payload.
    std::string snapshot_bytes() const;
    /// Errors: corrupt_snapshot.
    static SearchIndex from_snapshot_bytes(std::string_view bytes);

    /// Written to a temporary sibling and renamed into place.
    /// Errors: io_error.
    void persist(const std::filesystem::path& path) const;
    /// Errors: io_error, corrupt_snapshot.
    static SearchIndex restore(const std::filesystem::path& path);

private:
    struct Column {
        std::vector<std::uint32_t> slots;
        std::vector<double> volumes;
        std::vector<double> intensities;
    };

    struct State {
        std::vector<IndexDocument> docs;
        std::vector<std::uint64_t> live;
        std::vector<std::int32_t> days;
        std::unordered_map<std::string, std::uint32_t> slot_by_uid;
        std::unordered_map<std::string, Column> columns;
        std::unordered_map<std::string, std::vector<std::uint32_t>> patients;
        std::size_t dead = 0;
    };

    State state_;
    mutable std::shared_mutex mutex_;

    void insert_locked(IndexDocument doc);
    void remove_locked(std::uint32_t slot);
    void compact_locked();
    std::vector<std::uint64_t> evaluate(const Query& q) const;
};

}  // namespace ctindex::search
