#include "ctindex/search/kernels.hpp"

#include <atomic>
#include <bit>
#include <cassert>

namespace ctindex::search::kernels {

namespace scalar {

void range_mask_f64(const double* values, std::size_t n, double lo, double hi, std::uint64_t* out) {
    const std::size_t words = words_for(n);
    for (std::size_t w = 0; w < words; ++w) {
        out[w] = 0;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (values[i] >= lo && values[i] <= hi) {
            out[i / 64] |= std::uint64_t{1} << (i % 64);
        }
    }
}

void range_mask_i32(const std::int32_t* values, std::size_t n, std::int32_t lo, std::int32_t hi, std::uint64_t* out) {
    const std::size_t words = words_for(n);
    for (std::size_t w = 0; w < words; ++w) {
        out[w] = 0;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (values[i] >= lo && values[i] <= hi) {
            out[i / 64] |= std::uint64_t{1} << (i % 64);
        }
    }
}

void and_inplace(std::uint64_t* dst, const std::uint64_t* src, std::size_t words) {
    for (std::size_t i = 0; i < words; ++i) {
        dst[i] &= src[i];
    }
}

void or_inplace(std::uint64_t* dst, const std::uint64_t* src, std::size_t words) {
    for (std::size_t i = 0; i < words; ++i) {
        dst[i] |= src[i];
    }
}

void andnot_inplace(std::uint64_t* dst, const std::uint64_t* src, std::size_t words) {
    for (std::size_t i = 0; i < words; ++i) {
        dst[i] &= ~src[i];
    }
}

}  // namespace scalar

std::string_view to_string(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "scalar";
}

bool isa_supported(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2:
#if defined(CTINDEX_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        case Isa::neon:
#if defined(CTINDEX_HAVE_NEON_KERNELS)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Isa detected_isa() noexcept {
    if (isa_supported(Isa::avx2)) {
        return Isa::avx2;
    }
    if (isa_supported(Isa::neon)) {
        return Isa::neon;
    }
    return Isa::scalar;
}

namespace {

std::atomic<Isa>& active() {
    static std::atomic<Isa> isa{detected_isa()};
    return isa;
}

}  // namespace

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed); }

bool set_active_isa(Isa isa) noexcept {
    if (!isa_supported(isa)) {
        return false;
    }
    active().store(isa, std::memory_order_relaxed);
    return true;
}

#if defined(CTINDEX_HAVE_AVX2_KERNELS) && defined(CTINDEX_HAVE_NEON_KERNELS)
#error "at most one vector ISA per target"
#endif

#if defined(CTINDEX_HAVE_AVX2_KERNELS)
namespace vec = avx2;
constexpr Isa kVectorIsa = Isa::avx2;
#elif defined(CTINDEX_HAVE_NEON_KERNELS)
namespace vec = neon;
constexpr Isa kVectorIsa = Isa::neon;
#endif

#if defined(CTINDEX_HAVE_AVX2_KERNELS) || defined(CTINDEX_HAVE_NEON_KERNELS)
#define CTINDEX_DISPATCH(fn, ...)                 \
    do {                                          \
        if (active_isa() == kVectorIsa) {         \
            vec::fn(__VA_ARGS__);                 \
        } else {                                  \
            scalar::fn(__VA_ARGS__);              \
        }                                         \
    } while (false)
#else
#define CTINDEX_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

void range_mask(std::span<const double> values, double lo, double hi, std::span<std::uint64_t> out) {
    assert(out.size() >= words_for(values.size()));
    CTINDEX_DISPATCH(range_mask_f64, values.data(), values.size(), lo, hi, out.data());
}

void range_mask(std::span<const std::int32_t> values, std::int32_t lo, std::int32_t hi,
                std::span<std::uint64_t> out) {
    assert(out.size() >= words_for(values.size()));
    CTINDEX_DISPATCH(range_mask_i32, values.data(), values.size(), lo, hi, out.data());
}

void and_inplace(std::span<std::uint64_t> dst, std::span<const std::uint64_t> src) {
    assert(dst.size() == src.size());
    CTINDEX_DISPATCH(and_inplace, dst.data(), src.data(), dst.size());
}

void or_inplace(std::span<std::uint64_t> dst, std::span<const std::uint64_t> src) {
    assert(dst.size() == src.size());
    CTINDEX_DISPATCH(or_inplace, dst.data(), src.data(), dst.size());
}

void andnot_inplace(std::span<std::uint64_t> dst, std::span<const std::uint64_t> src) {
    assert(dst.size() == src.size());
    CTINDEX_DISPATCH(andnot_inplace, dst.data(), src.data(), dst.size());
}

std::size_t popcount(std::span<const std::uint64_t> words) noexcept {
    std::size_t total = 0;
    for (auto w : words) {
        total += static_cast<std::size_t>(std::popcount(w));
    }
    return total;
}

}  // namespace ctindex::search::kernels
