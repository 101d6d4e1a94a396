#include <gtest/gtest.h>

#include <dpcrys/padic.hpp>

using namespace dpcrys;

namespace {

// Legendre: sum_{i>=1} floor(n / p^i).
std::uint64_t legendre(std::uint64_t n, std::uint64_t p) {
    std::uint64_t s = 0;
    for (std::uint64_t q = p; q <= n; q *= p) s += n / q;
    return s;
}

// Unbounded-scan reference for [k]: scan far beyond the library window.
std::uint64_t bracket_reference(std::uint64_t k, std::uint64_t p) {
    std::uint64_t best = ~std::uint64_t{0};
    for (std::uint64_t n = k; n <= 8 * k + 200; ++n) best = std::min(best, n - legendre(n, p));
    return best;
}

}  // namespace

TEST(ZpN, RejectsBadParameters) {
    EXPECT_THROW(ZpN(2, 3), std::invalid_argument);
    EXPECT_THROW(ZpN(9, 1), std::invalid_argument);
    EXPECT_THROW(ZpN(3, 0), std::invalid_argument);
    EXPECT_THROW(ZpN(7, 12), std::invalid_argument);
    EXPECT_NO_THROW(ZpN(7, 11));
}

TEST(ZpN, InverseAndValuation) {
    ZpN R(5, 3);
    for (std::uint64_t a = 0; a < R.modulus(); ++a) {
        if (R.is_unit(a)) {
            EXPECT_EQ(R.mul(a, R.inv(a)), 1u);
        } else {
            EXPECT_THROW(R.inv(a), ArithmeticError);
        }
    }
    EXPECT_EQ(R.valuation(0), 3);
    EXPECT_EQ(R.valuation(25), 2);
    EXPECT_EQ(R.valuation(50), 2);
    EXPECT_EQ(R.valuation(7), 0);
}

TEST(Residue, MismatchedRings) {
    Residue a(ZpN(3, 2), 1), b(ZpN(5, 2), 1);
    EXPECT_THROW(a + b, std::invalid_argument);
}

TEST(Valuation, OrdFactorialMatchesLegendre) {
    for (std::uint64_t p : {3u, 5u, 7u})
        for (std::uint64_t n = 0; n <= 500; ++n) EXPECT_EQ(ord_factorial(n, p), legendre(n, p)) << p << " " << n;
    EXPECT_EQ(ord_factorial(9, 3), 4u);
}

TEST(Valuation, BracketMatchesReference) {
    for (std::uint64_t p : {3u, 5u, 7u, 11u})
        for (std::uint64_t k = 0; k <= 200; ++k) EXPECT_EQ(bracket(k, p), bracket_reference(k, p)) << p << " " << k;
}

TEST(Valuation, KnownBrackets) {
    EXPECT_EQ(bracket(1, 5), 1u);
    EXPECT_EQ(bracket(2, 5), 2u);
    EXPECT_EQ(bracket(3, 3), 2u);  // n=3: 3-1 = 2, n=4: 4-1 = 3
    EXPECT_EQ(min_dp_cap(5, 2), 2);
    EXPECT_EQ(min_dp_cap(7, 2), 2);
    EXPECT_EQ(min_dp_cap(3, 1), 1);
    EXPECT_EQ(min_dp_cap(3, 2), 2);
}

TEST(DividedPowers, MatchExactRational) {
    // y = p^n/n! mod p^N  iff  y * n! == p^n mod p^{N + ord n!}.
    for (std::uint64_t p : {3u, 5u, 7u}) {
        for (int N : {1, 2, 3}) {
            ZpN R(p, N);
            __int128 fact = 1;
            __int128 ppow = 1;
            for (std::uint64_t n = 0; n <= 18; ++n) {
                if (n > 0) {
                    fact *= n;
                    ppow *= p;
                }
                const std::uint64_t y = divided_power_of_p(n, R).value();
                __int128 mod = 1;
                for (std::uint64_t i = 0; i < N + ord_factorial(n, p); ++i) mod *= p;
                __int128 diff = (static_cast<__int128>(y) * fact - ppow) % mod;
                EXPECT_TRUE(diff == 0) << p << " " << N << " " << n;
            }
        }
    }
}

TEST(DividedPowers, BinomialMatchesPascal) {
    ZpN R(3, 3);
    std::vector<std::vector<std::uint64_t>> C(40, std::vector<std::uint64_t>(40, 0));
    for (int n = 0; n < 40; ++n) {
        C[n][0] = 1;
        for (int k = 1; k <= n; ++k) C[n][k] = (C[n - 1][k - 1] + (k < n ? C[n - 1][k] : 0)) % R.modulus();
        for (int k = 0; k <= n; ++k) EXPECT_EQ(binomial(n, k, R).value(), C[n][k]);
    }
}

TEST(DividedPowers, FactorialRatio) {
    ZpN R(7, 2);
    EXPECT_EQ(factorial_ratio(5, 2, R).value(), 60u % 49);
    EXPECT_EQ(factorial_ratio(14, 0, R).value(), 0u);
    EXPECT_THROW(factorial_ratio(1, 2, R), std::invalid_argument);
}
