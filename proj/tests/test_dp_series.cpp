#include <gtest/gtest.h>

#include <dpcrys/dp_series.hpp>
#include <dpcrys/sampling.hpp>

using namespace dpcrys;

namespace {

DPDeclaration decl1(const ZpN& R, int cap, int odd = 0) {
    return {BaseRing::make(R), odd, {"y"}, cap};
}

DPSeries random_series(Sampler& S, const DPDeclaration& d) {
    DPSeries f(d);
    for (int t = 0; t < 4; ++t) {
        Exponents K(d.vars.size());
        for (auto& k : K) k = static_cast<int>(S.uniform(0, static_cast<std::uint64_t>(d.dp_cap)));
        SampleShape sh{1, 2, 2};
        f.set(K, f.coefficient(K) + (d.odd ? S.even_element(d.base, d.odd, sh) : SuperPoly::constant(d.base, 0, S.residue(d.base->coeffs()))));
    }
    return f;
}

}  // namespace

TEST(DPMul, WorkedExamples) {
    ZpN R(5, 2);
    auto d = decl1(R, 4);
    auto one = DPSeries::constant(d, SuperPoly::constant(d.base, 0, 1));
    auto y = DPSeries::dp_power(d, 0, 1);
    auto sq = dp_mul(one + y, one + y);
    EXPECT_EQ(sq, DPSeries::from_coefficients(d, {1, 2, 2}));  // 1 + 2y + 2 y^[2]
    EXPECT_EQ(dp_mul(y, DPSeries::dp_power(d, 0, 2)), DPSeries::from_coefficients(d, {0, 0, 0, 3}));
    auto top = dp_mul(DPSeries::dp_power(d, 0, 4), y);
    EXPECT_TRUE(top.is_zero());
    EXPECT_TRUE(top.truncated());
}

TEST(DPMul, MismatchedRings) {
    auto d1 = decl1(ZpN(5, 2), 4), d2 = decl1(ZpN(3, 2), 4);
    EXPECT_THROW(dp_mul(DPSeries::dp_power(d1, 0, 1), DPSeries::dp_power(d2, 0, 1)), RingMismatchError);
}

TEST(DPMul, MixedRing) {
    ZpN R(5, 2);
    auto B = BaseRing::make(R, {"x"});
    DPDeclaration d{B, 2, {"y"}, 4};
    auto x = SuperPoly::even_var(B, 2, 0);
    auto xi = SuperPoly::odd_gen(B, 2, 0);
    auto xy = DPSeries(d);
    xy.set({1}, x);
    auto y = DPSeries::dp_power(d, 0, 1);
    DPSeries expect(d);
    expect.set({2}, Residue(R, 2) * x);
    EXPECT_EQ(mixed_ring_mul(xy, y), expect);
    auto a = DPSeries::constant(d, xi);
    EXPECT_TRUE(mixed_ring_mul(a, a).is_zero());
    auto xiy = DPSeries(d);
    xiy.set({1}, xi);
    auto xs = DPSeries::constant(d, x);
    DPSeries e2(d);
    e2.set({1}, x * xi);
    EXPECT_EQ(mixed_ring_mul(xs, xiy), e2);
}

TEST(DPMul, CommutativeAssociative) {
    Sampler S(4);
    for (auto [p, N] : {std::pair{3, 2}, {5, 2}, {7, 1}}) {
        ZpN R(p, N);
        auto B = BaseRing::make(R, {"x"});
        for (int odd : {0, 3}) {
            DPDeclaration d{B, odd, {"y1", "y2"}, 5};
            for (int t = 0; t < 40; ++t) {
                auto f = random_series(S, d), g = random_series(S, d), h = random_series(S, d);
                EXPECT_EQ(dp_mul(f, g), dp_mul(g, f));
                EXPECT_EQ(dp_mul(dp_mul(f, g), h), dp_mul(f, dp_mul(g, h)));
            }
        }
    }
}

TEST(Evaluate, WorkedExamples) {
    ZpN R(3, 2);
    auto d = decl1(R, 6);
    auto B = BaseRing::make(R);
    auto xi12 = SuperPoly::odd_product(B, 4, {0, 1});
    auto xi34 = SuperPoly::odd_product(B, 4, {2, 3});
    auto all_ones = DPSeries::from_coefficients(d, {1, 1, 1, 1, 1, 1, 1});
    EXPECT_EQ(evaluate(all_ones, xi12), SuperPoly::constant(B, 4, 1) + xi12);
    EXPECT_EQ(evaluate(DPSeries::dp_power(d, 0, 1), SuperPoly::constant(B, 4, 3)), SuperPoly::constant(B, 4, 3));
    EXPECT_EQ(evaluate(DPSeries::dp_power(d, 0, 2), xi12 + xi34), SuperPoly::odd_product(B, 4, {0, 1, 2, 3}));
    EXPECT_THROW(evaluate(all_ones, SuperPoly::constant(B, 4, 1)), NotInIdealError);
}

TEST(Evaluate, IsRingHomomorphism) {
    Sampler S(8);
    for (auto [p, N] : {std::pair{3, 2}, {5, 2}, {7, 1}}) {
        ZpN R(p, N);
        auto d = decl1(R, 6);
        auto B = BaseRing::make(R, {"x"});
        SampleShape sh;
        for (int t = 0; t < 60; ++t) {
            auto f = random_series(S, d), g = random_series(S, d);
            auto e = S.ideal_element(B, 4, sh);
            // Products beyond the cap are dropped in f*g; keep degrees low.
            DPSeries fl(d), gl(d);
            for (const auto& [K, c] : f.coefficients())
                if (K[0] <= 3) fl.set(K, c);
            for (const auto& [K, c] : g.coefficients())
                if (K[0] <= 3) gl.set(K, c);
            EXPECT_EQ(evaluate(dp_mul(fl, gl), e), evaluate(fl, e) * evaluate(gl, e)) << t;
            EXPECT_EQ(evaluate(fl + gl, e), evaluate(fl, e) + evaluate(gl, e));
        }
    }
}

TEST(RelativeEvaluate, WorkedExamples) {
    ZpN R(5, 2);
    auto Bx = BaseRing::make(R, {"x"});
    DPDeclaration d{Bx, 0, {"y"}, 4};
    auto C = BaseRing::make(R);
    const int m = 4;
    auto x = SuperPoly::even_var(Bx, 0, 0);
    auto e = SuperPoly::odd_product(C, m, {2, 3});

    DPSeries f0(d);
    f0.set({0}, x);
    LambdaMorphism to_one(Bx, 0, C, m, {SuperPoly::constant(C, m, 1)}, {});
    EXPECT_EQ(relative_evaluate(f0, to_one, e), SuperPoly::constant(C, m, 1));

    DPSeries f1(d);
    f1.set({1}, x);
    LambdaMorphism to_xi(Bx, 0, C, m, {SuperPoly::odd_product(C, m, {0, 1})}, {});
    EXPECT_EQ(relative_evaluate(f1, to_xi, e), SuperPoly::odd_product(C, m, {0, 1, 2, 3}));

    EXPECT_TRUE(relative_evaluate(DPSeries(d), to_xi, e).is_zero());
}
