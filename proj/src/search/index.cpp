#include "ctindex/search/index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <mutex>
#include <regex>
#include <sstream>

#include "ctindex/error.hpp"
#include "ctindex/search/kernels.hpp"
#include "ctindex/text.hpp"

namespace ctindex::search {

namespace {

using Bitmap = std::vector<std::uint64_t>;

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

void set_bit(Bitmap& b, std::uint32_t slot) { b[slot / 64] |= std::uint64_t{1} << (slot % 64); }

template <typename F>
void for_each_bit(const Bitmap& b, F&& f) {
    for (std::size_t w = 0; w < b.size(); ++w) {
        std::uint64_t word = b[w];
        while (word != 0) {
            const auto bit = static_cast<std::size_t>(std::countr_zero(word));
            f(static_cast<std::uint32_t>(w * 64 + bit));
            word &= word - 1;
        }
    }
}

}  // namespace

IndexDocument make_index_document(const annotate::AnnotationSet& set, const ingest::SeriesDescriptor& series) {
    if (set.series_uid != series.series_uid) {
        throw Error(Errc::series_mismatch,
                    "annotation set for '" + set.series_uid + "' does not belong to '" + series.series_uid + "'");
    }
    IndexDocument doc;
    doc.series_uid = series.series_uid;
    doc.patient_pseudonym = series.patient_pseudonym;
    doc.acquisition_date = series.acquisition_date;
    doc.indexer_version = set.indexer_version;
    doc.mapping_version = set.mapping_version;
    doc.annotations.reserve(set.annotations.size());
    for (const auto& a : set.annotations) {
        doc.annotations.push_back({a.snomed_code, a.radlex_id, a.volume_mm3, a.mean_intensity});
    }
    return doc;
}

void validate_document(const IndexDocument& doc) {
    auto invalid = [&doc](const std::string& what) {
        throw Error(Errc::invalid_document, "document '" + doc.series_uid + "': " + what);
    };
    if (doc.series_uid.empty()) {
        invalid("series_uid is empty");
    }
    if (doc.patient_pseudonym.empty()) {
        invalid("patient_pseudonym is empty");
    }
    if (!doc.acquisition_date.ok()) {
        invalid("acquisition_date is not a calendar date");
    }
    if (doc.annotations.empty()) {
        invalid("annotations must not be empty");
    }
    static const std::regex radlex(R"(RID\d+)");
    for (const auto& a : doc.annotations) {
        if (!all_digits(a.snomed_code)) {
            invalid("snomed_code '" + a.snomed_code + "' is not a concept id");
        }
        if (a.radlex_id && !std::regex_match(*a.radlex_id, radlex)) {
            invalid("radlex_id '" + *a.radlex_id + "' is malformed");
        }
        if (!std::isfinite(a.volume_mm3) || a.volume_mm3 < 0.0) {
            invalid("volume_mm3 must be finite and non-negative");
        }
        if (!std::isfinite(a.mean_intensity)) {
            invalid("mean_intensity must be finite");
        }
    }
}

SearchIndex::SearchIndex(SearchIndex&& other) noexcept {
    std::unique_lock lock(other.mutex_);
    state_ = std::move(other.state_);
    other.state_ = State{};
}

SearchIndex& SearchIndex::operator=(SearchIndex&& other) noexcept {
    if (this != &other) {
        std::scoped_lock lock(mutex_, other.mutex_);
        state_ = std::move(other.state_);
        other.state_ = State{};
    }
    return *this;
}

void SearchIndex::index_document(IndexDocument doc) {
    validate_document(doc);
    std::unique_lock lock(mutex_);
    if (auto it = state_.slot_by_uid.find(doc.series_uid); it != state_.slot_by_uid.end()) {
        remove_locked(it->second);
    }
    insert_locked(std::move(doc));
    if (state_.dead > 1024 && state_.dead > state_.slot_by_uid.size()) {
        compact_locked();
    }
}

bool SearchIndex::remove(std::string_view series_uid) {
    std::unique_lock lock(mutex_);
    auto it = state_.slot_by_uid.find(std::string(series_uid));
    if (it == state_.slot_by_uid.end()) {
        return false;
    }
    remove_locked(it->second);
    return true;
}

void SearchIndex::insert_locked(IndexDocument doc) {
    if (state_.docs.size() >= std::numeric_limits<std::uint32_t>::max()) {
        throw Error(Errc::invalid_document, "index is full");
    }
    const auto slot = static_cast<std::uint32_t>(state_.docs.size());
    for (const auto& a : doc.annotations) {
        auto& col = state_.columns[a.snomed_code];
        col.slots.push_back(slot);
        col.volumes.push_back(a.volume_mm3);
        col.intensities.push_back(a.mean_intensity);
    }
    state_.patients[doc.patient_pseudonym].push_back(slot);
    state_.days.push_back(to_day_number(doc.acquisition_date));
    if (state_.live.size() < kernels::words_for(slot + 1)) {
        state_.live.push_back(0);
    }
    set_bit(state_.live, slot);
    state_.slot_by_uid.emplace(doc.series_uid, slot);
    state_.docs.push_back(std::move(doc));
}

void SearchIndex::remove_locked(std::uint32_t slot) {
    // Postings keep the slot; every evaluation is masked by `live`.
    state_.live[slot / 64] &= ~(std::uint64_t{1} << (slot % 64));
    state_.slot_by_uid.erase(state_.docs[slot].series_uid);
    state_.docs[slot].annotations.clear();
    state_.docs[slot].annotations.shrink_to_fit();
    ++state_.dead;
}

void SearchIndex::compact_locked() {
    State old = std::move(state_);
    state_ = State{};
    for_each_bit(old.live, [&](std::uint32_t slot) { insert_locked(std::move(old.docs[slot])); });
}

std::vector<std::uint64_t> SearchIndex::evaluate(const Query& q) const {
    const std::size_t words = state_.live.size();
    Bitmap out(words, 0);
    switch (q.kind) {
        case QueryKind::match_all:
            out = state_.live;
            break;
        case QueryKind::has_code:
            if (auto it = state_.columns.find(q.value); it != state_.columns.end()) {
                for (auto slot : it->second.slots) {
                    set_bit(out, slot);
                }
            }
            break;
        case QueryKind::volume_in_range:
        case QueryKind::intensity_in_range: {
            auto it = state_.columns.find(q.value);
            if (it == state_.columns.end()) {
                break;
            }
            const Column& col = it->second;
            const auto& values = q.kind == QueryKind::volume_in_range ? col.volumes : col.intensities;
            Bitmap rows(kernels::words_for(values.size()), 0);
            kernels::range_mask(values, q.min.value_or(-std::numeric_limits<double>::infinity()),
                                q.max.value_or(std::numeric_limits<double>::infinity()), rows);
            for_each_bit(rows, [&](std::uint32_t row) { set_bit(out, col.slots[row]); });
            break;
        }
        case QueryKind::date_in_range: {
            const std::int32_t lo =
                q.date_min ? to_day_number(*q.date_min) : std::numeric_limits<std::int32_t>::min();
            const std::int32_t hi =
                q.date_max ? to_day_number(*q.date_max) : std::numeric_limits<std::int32_t>::max();
            kernels::range_mask(state_.days, lo, hi, out);
            break;
        }
        case QueryKind::patient_is:
            if (auto it = state_.patients.find(q.value); it != state_.patients.end()) {
                for (auto slot : it->second) {
                    set_bit(out, slot);
                }
            }
            break;
        case QueryKind::all_of:
            out = evaluate(q.children.front());
            for (std::size_t i = 1; i < q.children.size(); ++i) {
                if (kernels::popcount(out) == 0) {
                    break;
                }
                kernels::and_inplace(out, evaluate(q.children[i]));
            }
            break;
        case QueryKind::any_of:
            out = evaluate(q.children.front());
            for (std::size_t i = 1; i < q.children.size(); ++i) {
                kernels::or_inplace(out, evaluate(q.children[i]));
            }
            break;
        case QueryKind::negate:
            out = state_.live;
            kernels::andnot_inplace(out, evaluate(q.children.front()));
            break;
    }
    return out;
}

SearchResult SearchIndex::search(const Query& q, Page page) const {
    validate(q);
    if (page.limit > kMaxPageLimit) {
        throw Error(Errc::invalid_argument, "limit exceeds " + std::to_string(kMaxPageLimit));
    }
    std::shared_lock lock(mutex_);
    Bitmap hits = evaluate(q);
    kernels::and_inplace(hits, state_.live);

    std::vector<std::uint32_t> slots;
    slots.reserve(kernels::popcount(hits));
    for_each_bit(hits, [&](std::uint32_t slot) { slots.push_back(slot); });
    std::sort(slots.begin(), slots.end(), [this](std::uint32_t a, std::uint32_t b) {
        if (state_.days[a] != state_.days[b]) {
            return state_.days[a] > state_.days[b];
        }
        return state_.docs[a].series_uid < state_.docs[b].series_uid;
    });

    SearchResult result;
    result.total = slots.size();
    const std::size_t begin = std::min(page.offset, slots.size());
    const std::size_t end = begin + std::min(page.limit, slots.size() - begin);
    result.hits.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        result.hits.push_back(state_.docs[slots[i]].series_uid);
    }
    return result;
}

std::optional<IndexDocument> SearchIndex::get(std::string_view series_uid) const {
    std::shared_lock lock(mutex_);
    auto it = state_.slot_by_uid.find(std::string(series_uid));
    if (it == state_.slot_by_uid.end()) {
        return std::nullopt;
    }
    return state_.docs[it->second];
}

std::size_t SearchIndex::size() const {
    std::shared_lock lock(mutex_);
    return state_.slot_by_uid.size();
}

std::vector<IndexDocument> SearchIndex::documents() const {
    std::shared_lock lock(mutex_);
    std::vector<IndexDocument> out;
    out.reserve(state_.slot_by_uid.size());
    for_each_bit(state_.live, [&](std::uint32_t slot) { out.push_back(state_.docs[slot]); });
    std::sort(out.begin(), out.end(),
              [](const IndexDocument& a, const IndexDocument& b) { return a.series_uid < b.series_uid; });
    return out;
}

// Snapshot layout (little-endian):
//   "CTIXSNAP" | u32 version | u32 reserved | u64 payload length | payload
//   | 64 hex chars of SHA-256(payload)
// Payload: u64 doc count, then per document (sorted by uid) the strings
// uid, pseudonym, indexer version, mapping version, i32 day number,
// u32 annotation count and per annotation: code, u8 has_radlex, radlex,
// f64 volume, f64 intensity. Strings are u32 length + bytes.

namespace {

constexpr std::string_view kMagic = "CTIXSNAP";
constexpr std::uint32_t kSnapshotVersion = 1;
constexpr std::size_t kDigestSize = 64;

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) {
            u8(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            u8(static_cast<std::uint8_t>(v >> (8 * i)));
        }
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        out_.append(s);
    }
    std::string take() { return std::move(out_); }

private:
    std::string out_;
};

class Reader {
public:
    explicit Reader(std::string_view in) : in_(in) {}

    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(in_[pos_++]);
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(u8()) << (8 * i);
        }
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(u8()) << (8 * i);
        }
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const std::uint32_t n = u32();
        need(n);
        std::string s(in_.substr(pos_, n));
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == in_.size(); }
    std::size_t remaining() const { return in_.size() - pos_; }

private:
    std::string_view in_;
    std::size_t pos_ = 0;

    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) {
            throw Error(Errc::corrupt_snapshot, "snapshot payload is truncated");
        }
    }
};

}  // namespace

std::string SearchIndex::snapshot_bytes() const {
    const auto docs = documents();
    Writer payload;
    payload.u64(docs.size());
    for (const auto& d : docs) {
        payload.str(d.series_uid);
        payload.str(d.patient_pseudonym);
        payload.str(d.indexer_version);
        payload.str(d.mapping_version);
        payload.u32(static_cast<std::uint32_t>(to_day_number(d.acquisition_date)));
        payload.u32(static_cast<std::uint32_t>(d.annotations.size()));
        for (const auto& a : d.annotations) {
            payload.str(a.snomed_code);
            payload.u8(a.radlex_id ? 1 : 0);
            payload.str(a.radlex_id.value_or(""));
            payload.f64(a.volume_mm3);
            payload.f64(a.mean_intensity);
        }
    }
    const std::string body = payload.take();

    Writer out;
    std::string bytes(kMagic);
    out.u32(kSnapshotVersion);
    out.u32(0);
    out.u64(body.size());
    bytes += out.take();
    bytes += body;
    bytes += sha256_hex(body);
    return bytes;
}

SearchIndex SearchIndex::from_snapshot_bytes(std::string_view bytes) {
    constexpr std::size_t header = 8 + 4 + 4 + 8;
    if (bytes.size() < header + kDigestSize || bytes.substr(0, kMagic.size()) != kMagic) {
        throw Error(Errc::corrupt_snapshot, "not a search index snapshot");
    }
    Reader head(bytes.substr(kMagic.size(), header - kMagic.size()));
    const std::uint32_t version = head.u32();
    const std::uint32_t reserved = head.u32();
    const std::uint64_t length = head.u64();
    if (version != kSnapshotVersion) {
        throw Error(Errc::corrupt_snapshot, "unsupported snapshot version " + std::to_string(version));
    }
    if (reserved != 0) {
        throw Error(Errc::corrupt_snapshot, "snapshot header has non-zero reserved field");
    }
    if (length != bytes.size() - header - kDigestSize) {
        throw Error(Errc::corrupt_snapshot, "snapshot length does not match header");
    }
    const std::string_view body = bytes.substr(header, length);
    if (sha256_hex(body) != bytes.substr(header + length)) {
        throw Error(Errc::corrupt_snapshot, "snapshot checksum mismatch");
    }

    Reader in(body);
    SearchIndex index;
    const std::uint64_t count = in.u64();
    for (std::uint64_t i = 0; i < count; ++i) {
        IndexDocument d;
        d.series_uid = in.str();
        d.patient_pseudonym = in.str();
        d.indexer_version = in.str();
        d.mapping_version = in.str();
        d.acquisition_date = from_day_number(static_cast<std::int32_t>(in.u32()));
        const std::uint32_t n = in.u32();
        if (n > in.remaining()) {
            throw Error(Errc::corrupt_snapshot, "annotation count exceeds payload");
        }
        d.annotations.reserve(n);
        for (std::uint32_t k = 0; k < n; ++k) {
            IndexedAnnotation a;
            a.snomed_code = in.str();
            const bool has_radlex = in.u8() != 0;
            std::string radlex = in.str();
            if (has_radlex) {
                a.radlex_id = std::move(radlex);
            }
            a.volume_mm3 = in.f64();
            a.mean_intensity = in.f64();
            d.annotations.push_back(std::move(a));
        }
        try {
            validate_document(d);
        } catch (const Error& e) {
            throw Error(Errc::corrupt_snapshot, std::string("invalid document in snapshot: ") + e.what());
        }
        if (index.state_.slot_by_uid.count(d.series_uid) != 0) {
            throw Error(Errc::corrupt_snapshot, "duplicate series uid '" + d.series_uid + "' in snapshot");
        }
        index.insert_locked(std::move(d));
    }
    if (!in.done()) {
        throw Error(Errc::corrupt_snapshot, "trailing bytes in snapshot payload");
    }
    return index;
}

void SearchIndex::persist(const std::filesystem::path& path) const {
    const std::string bytes = snapshot_bytes();
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(Errc::io_error, "cannot write " + tmp.string());
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw Error(Errc::io_error, "short write to " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw Error(Errc::io_error, "cannot rename snapshot into " + path.string() + ": " + ec.message());
    }
}

SearchIndex SearchIndex::restore(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::io_error, "cannot read " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_snapshot_bytes(buf.str());
}

}  // namespace ctindex::search
