// Built with -mavx2; only reached when the CPU reports AVX2.
#include <immintrin.h>

#include "ctindex/search/kernels.hpp"

namespace ctindex::search::kernels::avx2 {

void range_mask_f64(const double* values, std::size_t n, double lo, double hi, std::uint64_t* out) {
    const std::size_t words = words_for(n);
    const __m256d vlo = _mm256_set1_pd(lo);
    const __m256d vhi = _mm256_set1_pd(hi);
    for (std::size_t w = 0; w < words; ++w) {
        const std::size_t base = w * 64;
        const std::size_t end = base + 64 < n ? base + 64 : n;
        std::uint64_t bits = 0;
        std::size_t i = base;
        for (; i + 4 <= end; i += 4) {
            const __m256d v = _mm256_loadu_pd(values + i);
            const __m256d in = _mm256_and_pd(_mm256_cmp_pd(v, vlo, _CMP_GE_OQ), _mm256_cmp_pd(v, vhi, _CMP_LE_OQ));
            bits |= static_cast<std::uint64_t>(_mm256_movemask_pd(in)) << (i - base);
        }
        for (; i < end; ++i) {
            if (values[i] >= lo && values[i] <= hi) {
                bits |= std::uint64_t{1} << (i - base);
            }
        }
        out[w] = bits;
    }
}

void range_mask_i32(const std::int32_t* values, std::size_t n, std::int32_t lo, std::int32_t hi, std::uint64_t* out) {
    const std::size_t words = words_for(n);
    const __m256i vlo = _mm256_set1_epi32(lo);
    const __m256i vhi = _mm256_set1_epi32(hi);
    for (std::size_t w = 0; w < words; ++w) {
        const std::size_t base = w * 64;
        const std::size_t end = base + 64 < n ? base + 64 : n;
        std::uint64_t bits = 0;
        std::size_t i = base;
        for (; i + 8 <= end; i += 8) {
            const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(values + i));
            const __m256i out_of_range = _mm256_or_si256(_mm256_cmpgt_epi32(vlo, v), _mm256_cmpgt_epi32(v, vhi));
            const auto outside = static_cast<unsigned>(_mm256_movemask_ps(_mm256_castsi256_ps(out_of_range)));
            bits |= static_cast<std::uint64_t>(~outside & 0xFFu) << (i - base);
        }
        for (; i < end; ++i) {
            if (values[i] >= lo && values[i] <= hi) {
                bits |= std::uint64_t{1} << (i - base);
            }
        }
        out[w] = bits;
    }
}

namespace {

template <typename Op, typename Tail>
void bitwise(std::uint64_t* dst, const std::uint64_t* src, std::size_t words, Op op, Tail tail) {
    std::size_t i = 0;
    for (; i + 4 <= words; i += 4) {
        const __m256i a = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(dst + i));
        const __m256i b = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + i), op(a, b));
    }
    for (; i < words; ++i) {
        dst[i] = tail(dst[i], src[i]);
    }
}

}  // namespace

void and_inplace(std::uint64_t* dst, const std::uint64_t* src, std::size_t words) {
    bitwise(
        dst, src, words, [](__m256i a, __m256i b) { return _mm256_and_si256(a, b); },
        [](std::uint64_t a, std::uint64_t b) { return a & b; });
}

void or_inplace(std::uint64_t* dst, const std::uint64_t* src, std::size_t words) {
    bitwise(
        dst, src, words, [](__m256i a, __m256i b) { return _mm256_or_si256(a, b); },
        [](std::uint64_t a, std::uint64_t b) { return a | b; });
}

void andnot_inplace(std::uint64_t* dst, const std::uint64_t* src, std::size_t words) {
    // _mm256_andnot_si256(x, y) computes ~x & y.
    bitwise(
        dst, src, words, [](__m256i a, __m256i b) { return _mm256_andnot_si256(b, a); },
        [](std::uint64_t a, std::uint64_t b) { return a & ~b; });
}

}  // namespace ctindex::search::kernels::avx2
