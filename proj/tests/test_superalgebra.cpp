#include <gtest/gtest.h>

#include <dpcrys/sampling.hpp>
#include <dpcrys/superalgebra.hpp>

using namespace dpcrys;

namespace {

struct Fixture {
    ZpN R;
    BaseRingPtr B;
    int m;
};

Fixture make(std::uint64_t p, int N, int m, int nvars = 1) {
    ZpN R(p, N);
    std::vector<std::string> vars;
    for (int i = 0; i < nvars; ++i) vars.push_back("x" + std::to_string(i));
    BaseRing::Options o;
    o.degree_cap = 40;
    return {R, BaseRing::make(R, vars, o), m};
}

// (n m)! / (n! (m!)^n), an integer, mod p^N.
Residue composition_coefficient(unsigned n, unsigned m, const ZpN& R) {
    // prod_{j=1}^{n} C(j m - 1, m - 1)
    Residue r(R, 1);
    for (unsigned j = 1; j <= n; ++j) r = r * binomial(j * m - 1, m - 1, R);
    return r;
}

}  // namespace

TEST(SuperPoly, KoszulSigns) {
    auto f = make(3, 2, 3, 0);
    auto x1 = SuperPoly::odd_gen(f.B, 3, 0), x2 = SuperPoly::odd_gen(f.B, 3, 1), x3 = SuperPoly::odd_gen(f.B, 3, 2);
    EXPECT_EQ(x2 * x1, -(x1 * x2));
    EXPECT_TRUE((x1 * x1).is_zero());
    EXPECT_EQ(x3 * x1 * x2, x1 * x2 * x3);
    EXPECT_EQ(x3 * x2 * x1, -(x1 * x2 * x3));
    EXPECT_EQ((x1 * x2).parity(), Parity::Even);
    EXPECT_EQ((x1 + x1 * x2).parity(), Parity::Mixed);
}

TEST(SuperPoly, Supercommutative) {
    auto f = make(5, 2, 4, 2);
    Sampler S(7);
    SampleShape sh;
    for (int t = 0; t < 200; ++t) {
        SuperPoly a = S.odd_element(f.B, f.m, sh), b = S.odd_element(f.B, f.m, sh), c = S.even_element(f.B, f.m, sh);
        EXPECT_EQ(a * b, -(b * a));
        EXPECT_EQ(a * c, c * a);
        EXPECT_TRUE((a * a).is_zero());
        EXPECT_EQ((a * b) * c, a * (b * c));
    }
}

TEST(SuperPoly, MismatchedRings) {
    auto f = make(3, 2, 2), g = make(5, 2, 2);
    EXPECT_THROW(SuperPoly::odd_gen(f.B, 2, 0) + SuperPoly::odd_gen(g.B, 2, 0), RingMismatchError);
    EXPECT_THROW(SuperPoly::odd_gen(f.B, 2, 0) * SuperPoly::odd_gen(f.B, 3, 0), RingMismatchError);
}

TEST(SuperPoly, TruncationFlag) {
    ZpN R(3, 2);
    BaseRing::Options o;
    o.degree_cap = 2;
    auto B = BaseRing::make(R, {"x"}, o);
    auto x = SuperPoly::even_var(B, 0, 0);
    EXPECT_FALSE((x * x).truncated());
    auto x3 = x * x * x;
    EXPECT_TRUE(x3.is_zero());
    EXPECT_TRUE(x3.truncated());
}

TEST(SuperPoly, RewriteRules) {
    // y^2 -> x^3 + 1
    ZpN R(5, 2);
    BaseRing::Options o;
    o.rules.push_back({{0, 2}, {{{3, 0}, 1}, {{0, 0}, 1}}});
    auto B = BaseRing::make(R, {"x", "y"}, o);
    auto x = SuperPoly::even_var(B, 0, 0), y = SuperPoly::even_var(B, 0, 1);
    EXPECT_EQ(y * y, x * x * x + SuperPoly::constant(B, 0, 1));
    EXPECT_TRUE(B->reducedness_unchecked());
}

TEST(DPIdeal, Membership) {
    auto f = make(3, 2, 2);
    auto B = f.B;
    EXPECT_TRUE(in_dp_ideal(SuperPoly::constant(B, 2, 3)));
    EXPECT_FALSE(in_dp_ideal(SuperPoly::constant(B, 2, 1)));
    EXPECT_TRUE(in_dp_ideal(SuperPoly::odd_gen(B, 2, 0)));
    EXPECT_TRUE(in_dp_ideal(SuperPoly::odd_product(B, 2, {0, 1})));
    EXPECT_FALSE(in_dp_ideal(SuperPoly::even_var(B, 2, 0)));
}

TEST(Gamma, WorkedExamples) {
    {
        auto f = make(3, 2, 2);
        auto a = SuperPoly::odd_product(f.B, 2, {0, 1});
        EXPECT_TRUE(gamma(2, a).is_zero());
        EXPECT_EQ(gamma(1, a), a);
    }
    {
        auto f = make(3, 2, 4);
        auto w = SuperPoly::odd_product(f.B, 4, {0, 1}) + SuperPoly::odd_product(f.B, 4, {2, 3});
        EXPECT_EQ(gamma(2, w), SuperPoly::odd_product(f.B, 4, {0, 1, 2, 3}));
    }
    {
        auto f = make(3, 2, 0);
        // gamma_3(3) = 27/6 = 9/2 = 0 mod 9
        EXPECT_TRUE(gamma(3, SuperPoly::constant(f.B, 0, 3)).is_zero());
        // gamma_2(3) = 9/2 = 0 mod 9; gamma_1(3) = 3
        EXPECT_EQ(gamma(1, SuperPoly::constant(f.B, 0, 3)), SuperPoly::constant(f.B, 0, 3));
    }
    {
        auto f = make(3, 2, 2);
        EXPECT_THROW(gamma(2, SuperPoly::constant(f.B, 2, 1)), NotInIdealError);
        EXPECT_THROW(gamma(2, SuperPoly::odd_gen(f.B, 2, 0)), ParityError);
    }
}

TEST(Gamma, Axioms) {
    for (auto [p, N] : {std::pair{3, 2}, {5, 2}, {7, 1}, {3, 3}}) {
        auto f = make(p, N, 4, 1);
        Sampler S(1000 + p * 10 + N);
        SampleShape sh;
        for (int t = 0; t < 60; ++t) {
            SuperPoly a = S.ideal_element(f.B, f.m, sh), b = S.ideal_element(f.B, f.m, sh);
            Residue lam = S.residue(f.R);
            EXPECT_EQ(gamma(0, a), SuperPoly::constant(f.B, f.m, 1));
            EXPECT_EQ(gamma(1, a), a);
            for (unsigned n = 0; n <= 4; ++n) {
                // n! gamma_n(a) = a^n
                EXPECT_EQ(factorial_ratio(n, 0, f.R) * gamma(n, a), a.pow(n));
                SuperPoly sum(f.B, f.m);
                for (unsigned i = 0; i <= n; ++i) sum += gamma(i, a) * gamma(n - i, b);
                EXPECT_EQ(gamma(n, a + b), sum);
                EXPECT_EQ(gamma(n, lam * a), lam.pow(n) * gamma(n, a));
                for (unsigned k = 0; k <= 3; ++k) EXPECT_EQ(gamma(n, a) * gamma(k, a), binomial(n + k, n, f.R) * gamma(n + k, a));
                for (unsigned k = 1; k <= 2; ++k)
                    EXPECT_EQ(gamma(n, gamma(k, a)), composition_coefficient(n, k, f.R) * gamma(n * k, a));
            }
        }
    }
}

TEST(Morphism, Validation) {
    auto f = make(3, 2, 2, 1);
    auto B = f.B;
    std::vector<SuperPoly> ev{SuperPoly::odd_gen(B, 2, 0)};
    std::vector<SuperPoly> od{SuperPoly::odd_gen(B, 2, 0), SuperPoly::odd_gen(B, 2, 1)};
    EXPECT_THROW(LambdaMorphism(B, 2, B, 2, ev, od), MorphismError);
    std::vector<SuperPoly> ev2{SuperPoly::even_var(B, 2, 0)};
    std::vector<SuperPoly> od2{SuperPoly::even_var(B, 2, 0), SuperPoly::odd_gen(B, 2, 1)};
    EXPECT_THROW(LambdaMorphism(B, 2, B, 2, ev2, od2), MorphismError);
    auto id = LambdaMorphism::identity(B, 2);
    auto a = SuperPoly::even_var(B, 2, 0) * SuperPoly::odd_product(B, 2, {1, 0});
    EXPECT_EQ(id(a), a);
}

TEST(Morphism, RelationsMustMapToZero) {
    ZpN R(5, 1);
    BaseRing::Options o;
    o.rules.push_back({{2}, {{{0}, 1}}});  // x^2 = 1
    auto B = BaseRing::make(R, {"x"}, o);
    auto C = BaseRing::make(R, {"z"});
    EXPECT_THROW(LambdaMorphism(B, 0, C, 0, {SuperPoly::even_var(C, 0, 0)}, {}), MorphismError);
    EXPECT_NO_THROW(LambdaMorphism(B, 0, C, 0, {SuperPoly::constant(C, 0, -1)}, {}));
}

TEST(Morphism, IsRingMapAndCommutesWithGamma) {
    for (auto [p, N] : {std::pair{3, 2}, {5, 2}, {7, 1}}) {
        auto f = make(p, N, 3, 1);
        auto g = make(p, N, 4, 2);
        Sampler S(77 + p);
        SampleShape sh;
        for (int t = 0; t < 40; ++t) {
            auto phi = S.morphism(f.B, f.m, g.B, g.m, sh);
            auto a = S.ideal_element(f.B, f.m, sh), b = S.even_element(f.B, f.m, sh);
            EXPECT_EQ(phi(a * b), phi(a) * phi(b));
            EXPECT_EQ(phi(a + b), phi(a) + phi(b));
            for (unsigned n = 0; n <= 4; ++n) EXPECT_EQ(phi(gamma(n, a)), gamma(n, phi(a)));
        }
    }
}
