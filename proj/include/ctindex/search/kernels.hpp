#pragma once

// Column-scan and bitmap kernels behind query evaluation. Every kernel has
// a scalar reference; the AVX2 (x86-64) and NEON (AArch64) variants must
// produce bit-identical output and are selected at runtime.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace ctindex::search::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view to_string(Isa isa) noexcept;
bool isa_supported(Isa isa) noexcept;
/// Best variant the running CPU supports.
Isa detected_isa() noexcept;
Isa active_isa() noexcept;
/// Overrides dispatch (tests, benchmarks). Returns false if unsupported.
bool set_active_isa(Isa isa) noexcept;

constexpr std::size_t words_for(std::size_t bits) noexcept { return (bits + 63) / 64; }

// Range masks: bit i of `out` is set iff lo <= values[i] <= hi. `out` must
// hold words_for(values.size()) words; bits past values.size() are cleared.
void range_mask(std::span<const double> values, double lo, double hi, std::span<std::uint64_t> out);
void range_mask(std::span<const std::int32_t> values, std::int32_t lo, std::int32_t hi,
                std::span<std::uint64_t> out);

// In-place bitmap algebra over equal-length word spans.
void and_inplace(std::span<std::uint64_t> dst, std::span<const std::uint64_t> src);
void or_inplace(std::span<std::uint64_t> dst, std::span<const std::uint64_t> src);
/// dst &= ~src
void andnot_inplace(std::span<std::uint64_t> dst, std::span<const std::uint64_t> src);

std::size_t popcount(std::span<const std::uint64_t> words) noexcept;

namespace scalar {
void range_mask_f64(const double* values, std::size_t n, double lo, double hi, std::uint64_t* out);
void range_mask_i32(const std::int32_t* values, std::size_t n, std::int32_t lo, std::int32_t hi, std::uint64_t* out);
void and_inplace(std::uint64_t* dst, const std::uint64_t* src, std::size_t words);
void or_inplace(std::uint64_t* dst, const std::uint64_t* src, std::size_t words);
void andnot_inplace(std::uint64_t* dst, const std::uint64_t* src, std::size_t words);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define CTINDEX_HAVE_AVX2_KERNELS 1
namespace avx2 {
void range_mask_f64(const double* values, std::size_t n, double lo, double hi, std::uint64_t* out);
void range_mask_i32(const std::int32_t* values, std::size_t n, std::int32_t lo, std::int32_t hi, std::uint64_t* out);
void and_inplace(std::uint64_t* dst, const std::uint64_t* src, std::size_t words);
void or_inplace(std::uint64_t* dst, const std::uint64_t* src, std::size_t words);
void andnot_inplace(std::uint64_t* dst, const std::uint64_t* src, std::size_t words);
}  // namespace avx2
#endif

#if defined(__aarch64__) || defined(_M_ARM64)
#define CTINDEX_HAVE_NEON_KERNELS 1
namespace neon {
void range_mask_f64(const double* values, std::size_t n, double lo, double hi, std::uint64_t* out);
void range_mask_i32(const std::int32_t* values, std::size_t n, std::int32_t lo, std::int32_t hi, std::uint64_t* out);
void and_inplace(std::uint64_t* dst, const std::uint64_t* src, std::size_t words);
void or_inplace(std::uint64_t* dst, const std::uint64_t* src, std::size_t words);
void andnot_inplace(std::uint64_t* dst, const std::uint64_t* src, std::size_t words);
}  // namespace neon
#endif

}  // namespace ctindex::search::kernels
