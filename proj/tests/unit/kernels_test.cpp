#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "ctindex/search/kernels.hpp"

namespace ctindex::search::kernels {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename T>
std::vector<std::uint64_t> naive_mask(const std::vector<T>& values, T lo, T hi) {
    std::vector<std::uint64_t> out(words_for(values.size()), 0);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (lo <= values[i] && values[i] <= hi) {
            out[i / 64] |= std::uint64_t{1} << (i % 64);
        }
    }
    return out;
}

std::vector<Isa> supported_isas() {
    std::vector<Isa> out;
    for (const auto isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
        if (isa_supported(isa)) {
            out.push_back(isa);
        }
    }
    return out;
}

class IsaScope {
public:
    explicit IsaScope(Isa isa) : previous_(active_isa()) { EXPECT_TRUE(set_active_isa(isa)); }
    ~IsaScope() { set_active_isa(previous_); }
    IsaScope(const IsaScope&) = delete;
    IsaScope& operator=(const IsaScope&) = delete;

private:
    Isa previous_;
};

std::vector<double> random_doubles(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> value(-100.0, 100.0);
    std::vector<double> v(n);
    for (auto& x : v) {
        switch (rng() % 20) {
            case 0: x = kNaN; break;
            case 1: x = kInf; break;
            case 2: x = -kInf; break;
            case 3: x = std::round(value(rng)); break;
            case 4: x = -0.0; break;
            default: x = value(rng);
        }
    }
    return v;
}

TEST(Kernels, ScalarAlwaysAvailable) {
    EXPECT_TRUE(isa_supported(Isa::scalar));
    EXPECT_TRUE(isa_supported(detected_isa()));
    EXPECT_EQ(to_string(Isa::avx2), "avx2");
#if !defined(CTINDEX_HAVE_NEON_KERNELS)
    EXPECT_FALSE(isa_supported(Isa::neon));
    EXPECT_FALSE(set_active_isa(Isa::neon));
#endif
}

TEST(Kernels, RangeMaskF64MatchesNaive) {
    std::mt19937_64 rng(11);
    for (const auto isa : supported_isas()) {
        IsaScope scope(isa);
        for (int round = 0; round < 300; ++round) {
            const std::size_t n = round < 140 ? static_cast<std::size_t>(round) : rng() % 3000;
            const auto values = random_doubles(rng, n);
            double lo = std::round(static_cast<double>(static_cast<int>(rng() % 200)) - 100.0);
            double hi = lo + static_cast<double>(rng() % 120);
            if (rng() % 5 == 0) {
                lo = -kInf;
            }
            if (rng() % 5 == 0) {
                hi = kInf;
            }
            // Poisoned tail words must be cleared.
            std::vector<std::uint64_t> out(words_for(n), ~std::uint64_t{0});
            range_mask(values, lo, hi, out);
            ASSERT_EQ(out, naive_mask(values, lo, hi)) << to_string(isa) << " n=" << n;
        }
    }
}

TEST(Kernels, RangeMaskI32MatchesNaive) {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<std::int32_t> day(-5, 40000);
    for (const auto isa : supported_isas()) {
        IsaScope scope(isa);
        for (int round = 0; round < 300; ++round) {
            const std::size_t n = round < 140 ? static_cast<std::size_t>(round) : rng() % 3000;
            std::vector<std::int32_t> values(n);
            for (auto& v : values) {
                v = rng() % 50 == 0 ? (rng() % 2 ? std::numeric_limits<std::int32_t>::min()
                                                 : std::numeric_limits<std::int32_t>::max())
                                    : day(rng);
            }
            auto lo = day(rng);
            auto hi = lo + static_cast<std::int32_t>(rng() % 5000);
            if (rng() % 6 == 0) {
                lo = std::numeric_limits<std::int32_t>::min();
            }
            if (rng() % 6 == 0) {
                hi = std::numeric_limits<std::int32_t>::max();
            }
            std::vector<std::uint64_t> out(words_for(n), ~std::uint64_t{0});
            range_mask(values, lo, hi, out);
            ASSERT_EQ(out, naive_mask(values, lo, hi)) << to_string(isa) << " n=" << n;
        }
    }
}

TEST(Kernels, EmptyAndInvertedRanges) {
    const std::vector<double> values{1.0, 2.0, 3.0};
    for (const auto isa : supported_isas()) {
        IsaScope scope(isa);
        std::vector<std::uint64_t> out(1, 0);
        range_mask(values, 3.0, 1.0, out);
        EXPECT_EQ(out[0], 0u);
        range_mask(values, 2.0, 2.0, out);
        EXPECT_EQ(out[0], 0b010u);
        range_mask(values, kNaN, kInf, out);
        EXPECT_EQ(out[0], 0u);
        range_mask(std::span<const double>{}, 0.0, 1.0, std::span<std::uint64_t>{});
    }
}

TEST(Kernels, BitmapAlgebraMatchesNaive) {
    std::mt19937_64 rng(13);
    for (const auto isa : supported_isas()) {
        IsaScope scope(isa);
        for (std::size_t words = 0; words < 70; ++words) {
            std::vector<std::uint64_t> a(words), b(words);
            for (std::size_t i = 0; i < words; ++i) {
                a[i] = rng();
                b[i] = rng();
            }
            auto x = a, y = a, z = a;
            and_inplace(x, b);
            or_inplace(y, b);
            andnot_inplace(z, b);
            std::size_t bits = 0;
            for (std::size_t i = 0; i < words; ++i) {
                ASSERT_EQ(x[i], a[i] & b[i]);
                ASSERT_EQ(y[i], a[i] | b[i]);
                ASSERT_EQ(z[i], a[i] & ~b[i]);
                bits += static_cast<std::size_t>(std::popcount(a[i]));
            }
            EXPECT_EQ(popcount(a), bits);
        }
    }
}

#if defined(CTINDEX_HAVE_AVX2_KERNELS)
TEST(Kernels, Avx2VariantsAreBitIdenticalToScalar) {
    if (!isa_supported(Isa::avx2)) {
        GTEST_SKIP() << "CPU lacks AVX2";
    }
    std::mt19937_64 rng(14);
    for (int round = 0; round < 200; ++round) {
        const std::size_t n = rng() % 1500;
        const auto values = random_doubles(rng, n);
        std::vector<std::uint64_t> s(words_for(n)), v(words_for(n));
        scalar::range_mask_f64(values.data(), n, -20.0, 35.5, s.data());
        avx2::range_mask_f64(values.data(), n, -20.0, 35.5, v.data());
        ASSERT_EQ(s, v);

        std::vector<std::int32_t> ints(n);
        for (auto& i : ints) {
            i = static_cast<std::int32_t>(rng() % 1000) - 500;
        }
        scalar::range_mask_i32(ints.data(), n, -100, 250, s.data());
        avx2::range_mask_i32(ints.data(), n, -100, 250, v.data());
        ASSERT_EQ(s, v);
    }
}
#endif

}  // namespace
}  // namespace ctindex::search::kernels
