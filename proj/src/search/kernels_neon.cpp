#include <arm_neon.h>

#include "ctindex/search/kernels.hpp"

namespace ctindex::search::kernels::neon {

void range_mask_f64(const double* values, std::size_t n, double lo, double hi, std::uint64_t* out) {
    const std::size_t words = words_for(n);
    const float64x2_t vlo = vdupq_n_f64(lo);
    const float64x2_t vhi = vdupq_n_f64(hi);
    for (std::size_t w = 0; w < words; ++w) {
        const std::size_t base = w * 64;
        const std::size_t end = base + 64 < n ? base + 64 : n;
        std::uint64_t bits = 0;
        std::size_t i = base;
        for (; i + 2 <= end; i += 2) {
            const float64x2_t v = vld1q_f64(values + i);
            const uint64x2_t in = vandq_u64(vcgeq_f64(v, vlo), vcleq_f64(v, vhi));
            bits |= (vgetq_lane_u64(in, 0) & 1u) << (i - base);
            bits |= (vgetq_lane_u64(in, 1) & 1u) << (i - base + 1);
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
    const int32x4_t vlo = vdupq_n_s32(lo);
    const int32x4_t vhi = vdupq_n_s32(hi);
    static const uint32x4_t weights = {1u, 2u, 4u, 8u};
    for (std::size_t w = 0; w < words; ++w) {
        const std::size_t base = w * 64;
        const std::size_t end = base + 64 < n ? base + 64 : n;
        std::uint64_t bits = 0;
        std::size_t i = base;
        for (; i + 4 <= end; i += 4) {
            const int32x4_t v = vld1q_s32(values + i);
            const uint32x4_t in = vandq_u32(vcgeq_s32(v, vlo), vcleq_s32(v, vhi));
            const std::uint64_t nibble = vaddvq_u32(vandq_u32(in, weights));
            bits |= nibble << (i - base);
        }
        for (; i < end; ++i) {
            if (values[i] >= lo && values[i] <= hi) {
                bits |= std::uint64_t{1} << (i - base);
            }
        }
        out[w] = bits;
    }
}

void and_inplace(std::uint64_t* dst, const std::uint64_t* src, std::size_t words) {
    std::size_t i = 0;
    for (; i + 2 <= words; i += 2) {
        vst1q_u64(dst + i, vandq_u64(vld1q_u64(dst + i), vld1q_u64(src + i)));
    }
    for (; i < words; ++i) {
        dst[i] &= src[i];
    }
}

void or_inplace(std::uint64_t* dst, const std::uint64_t* src, std::size_t words) {
    std::size_t i = 0;
    for (; i + 2 <= words; i += 2) {
        vst1q_u64(dst + i, vorrq_u64(vld1q_u64(dst + i), vld1q_u64(src + i)));
    }
    for (; i < words; ++i) {
        dst[i] |= src[i];
    }
}

void andnot_inplace(std::uint64_t* dst, const std::uint64_t* src, std::size_t words) {
    std::size_t i = 0;
    for (; i + 2 <= words; i += 2) {
        // vbicq(a, b) = a & ~b
        vst1q_u64(dst + i, vbicq_u64(vld1q_u64(dst + i), vld1q_u64(src + i)));
    }
    for (; i < words; ++i) {
        dst[i] &= ~src[i];
    }
}

}  // namespace ctindex::search::kernels::neon
