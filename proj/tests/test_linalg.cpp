#include <gtest/gtest.h>

#include <random>
#include <set>

#include <dpcrys/linalg.hpp>

using namespace dpcrys;

namespace {

ZpNMatrix random_matrix(std::size_t r, std::size_t c, const ZpN& R, std::mt19937_64& rng, int bias = 0) {
    ZpNMatrix M(r, c, R);
    std::uniform_int_distribution<std::uint64_t> d(0, R.modulus() - 1);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            std::uint64_t v = d(rng);
            // Bias towards zero divisors.
            if (bias > 0 && rng() % 2) v = R.mul(v, R.p_pow(static_cast<int>(rng() % (bias + 1))));
            M(i, j) = v;
        }
    return M;
}

// Brute-force element count of the row span over Z/p^N (tiny cases only).
std::size_t span_size(const ZpNMatrix& M) {
    const ZpN& R = M.ring();
    std::set<std::vector<std::uint64_t>> seen;
    std::vector<std::uint64_t> coef(M.rows(), 0);
    while (true) {
        std::vector<std::uint64_t> v(M.cols(), 0);
        for (std::size_t i = 0; i < M.rows(); ++i)
            for (std::size_t j = 0; j < M.cols(); ++j) v[j] = R.add(v[j], R.mul(coef[i], M(i, j)));
        seen.insert(v);
        std::size_t k = 0;
        while (k < coef.size() && ++coef[k] == R.modulus()) coef[k++] = 0;
        if (k == coef.size()) break;
    }
    return seen.size();
}

}  // namespace

TEST(Howell, WorkedExamples) {
    ZpN R(3, 2);
    auto I = ZpNMatrix::identity(3, R);
    EXPECT_EQ(howell_form(I).H, I);
    auto P = ZpNMatrix::from_rows({{3}}, R);
    EXPECT_EQ(howell_form(P).H, P);
    auto Z = ZpNMatrix(2, 3, R);
    EXPECT_EQ(howell_form(Z).H.rows(), 0u);
}

TEST(Howell, ClosureRow) {
    // Row (3, 1) mod 9: 3*(3,1) = (0,3) must appear in the Howell form.
    ZpN R(3, 2);
    auto M = ZpNMatrix::from_rows({{3, 1}}, R);
    auto H = howell_form(M).H;
    ASSERT_EQ(H.rows(), 2u);
    EXPECT_EQ(H(1, 0), 0u);
    EXPECT_EQ(H(1, 1), 3u);
}

TEST(Howell, InvariantsOnRandomMatrices) {
    std::mt19937_64 rng(5);
    for (auto [p, N] : {std::pair{3, 2}, {5, 2}, {3, 3}}) {
        ZpN R(p, N);
        for (int t = 0; t < 60; ++t) {
            auto M = random_matrix(1 + rng() % 4, 1 + rng() % 4, R, rng, N);
            auto [H, T] = howell_form(M);
            EXPECT_EQ(T * M, H);
            EXPECT_EQ(howell_form(H).H, H);  // idempotent
            // Same row span: each row of either lies in the span of the other.
            for (std::size_t i = 0; i < M.rows(); ++i) {
                std::vector<std::uint64_t> r(M.row(i), M.row(i) + M.cols());
                EXPECT_TRUE(H.rows() > 0 ? in_row_span(H, r) : std::all_of(r.begin(), r.end(), [](auto v) { return v == 0; }));
            }
            for (std::size_t i = 0; i < H.rows(); ++i) {
                std::vector<std::uint64_t> r(H.row(i), H.row(i) + H.cols());
                EXPECT_TRUE(in_row_span(M, r));
            }
            // Uniqueness: a random row-equivalent matrix gives the same form.
            auto G = random_matrix(M.rows(), M.rows(), R, rng);
            for (std::size_t i = 0; i < G.rows(); ++i) G(i, i) = R.add(G(i, i), 0);
            auto M2 = M;
            M2 = ZpNMatrix::identity(M.rows(), R) * M;
            if (M.rows() >= 2) M2.row_axpy(0, 1, 2);
            EXPECT_EQ(howell_form(M2).H, H);
        }
    }
}

TEST(Howell, SpanCountMatchesBruteForce) {
    std::mt19937_64 rng(9);
    ZpN R(3, 2);
    for (int t = 0; t < 20; ++t) {
        auto M = random_matrix(2, 2, R, rng, 2);
        auto H = howell_form(M).H;
        // |span| = prod over Howell pivots of p^{N - v}.
        std::size_t expect = 1;
        for (std::size_t i = 0; i < H.rows(); ++i) {
            std::size_t j = 0;
            while (H(i, j) == 0) ++j;
            expect *= R.modulus() / H(i, j);
        }
        EXPECT_EQ(span_size(M), expect);
    }
}

TEST(Solve, WorkedExamples) {
    ZpN R(3, 2);
    auto I = ZpNMatrix::identity(2, R);
    EXPECT_EQ(*solve(I, {4, 5}), (std::vector<std::uint64_t>{4, 5}));
    auto P = ZpNMatrix::from_rows({{3}}, R);
    EXPECT_FALSE(solve(P, {1}).has_value());
    ZpN R3(3, 3);
    auto P3 = ZpNMatrix::from_rows({{3}}, R3);
    auto x = solve(P3, {9});
    ASSERT_TRUE(x.has_value());
    EXPECT_EQ(R3.mul((*x)[0], 3), 9u);
    EXPECT_EQ((*x)[0] % 9, 3u);
}

TEST(Solve, RandomConsistency) {
    std::mt19937_64 rng(11);
    for (auto [p, N] : {std::pair{3, 2}, {5, 3}, {7, 1}}) {
        ZpN R(p, N);
        for (int t = 0; t < 100; ++t) {
            auto M = random_matrix(1 + rng() % 5, 1 + rng() % 5, R, rng, N);
            std::vector<std::uint64_t> x(M.cols());
            for (auto& v : x) v = rng() % R.modulus();
            auto b = M.apply(x);
            auto y = solve(M, b);
            ASSERT_TRUE(y.has_value());
            EXPECT_EQ(M.apply(*y), b);
            // Kernel generators are killed.
            auto K = kernel(M);
            EXPECT_TRUE((M * K).is_zero());
        }
    }
}

TEST(Kernel, CountMatchesBruteForce) {
    std::mt19937_64 rng(3);
    ZpN R(3, 2);
    for (int t = 0; t < 20; ++t) {
        auto M = random_matrix(2, 2, R, rng, 2);
        std::size_t count = 0;
        for (std::uint64_t a = 0; a < 9; ++a)
            for (std::uint64_t b = 0; b < 9; ++b) {
                auto y = M.apply({a, b});
                if (y[0] == 0 && y[1] == 0) ++count;
            }
        auto K = kernel(M);
        EXPECT_EQ(span_size(K.transpose()), count);
    }
}

TEST(MiddleCohomology, WorkedExamples) {
    ZpN R(3, 2);
    EXPECT_EQ(cohomology_exponents(ZpNMatrix(2, 0, R), ZpNMatrix(0, 2, R)), (std::vector<int>{2, 2}));
    EXPECT_EQ(cohomology_exponents(ZpNMatrix::from_rows({{3}}, R), ZpNMatrix(0, 1, R)), (std::vector<int>{1}));
    EXPECT_EQ(cohomology_exponents(ZpNMatrix::identity(2, R), ZpNMatrix(0, 2, R)), (std::vector<int>{}));
    EXPECT_THROW(middle_cohomology(ZpNMatrix::identity(1, R), ZpNMatrix::identity(1, R)), CompositionNonzeroError);
}

TEST(MiddleCohomology, RankNullityOverField) {
    std::mt19937_64 rng(21);
    ZpN R(5, 1);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n0 = 1 + rng() % 4, n1 = 1 + rng() % 5, n2 = 1 + rng() % 4;
        // B * A = 0 by construction: A = K * C with K spanning ker B.
        auto B = random_matrix(n2, n1, R, rng);
        if (rng() % 2) B.row_scale(0, 0);
        auto K = kernel(B);
        auto C = random_matrix(K.cols(), n0, R, rng);
        auto A = K.cols() ? K * C : ZpNMatrix(n1, n0, R);
        const auto SB = smith_form(B), SA = smith_form(A);
        const std::size_t dimker = n1 - SB.rank();
        EXPECT_EQ(cohomology_exponents(A, B).size(), dimker - SA.rank());
    }
}

TEST(MiddleCohomology, RepresentativesAndCoordinates) {
    std::mt19937_64 rng(23);
    for (auto [p, N] : {std::pair{3, 2}, {3, 3}, {5, 2}}) {
        ZpN R(p, N);
        for (int t = 0; t < 40; ++t) {
            const std::size_t n0 = 1 + rng() % 3, n1 = 2 + rng() % 4, n2 = 1 + rng() % 3;
            auto B = random_matrix(n2, n1, R, rng, N);
            auto K = kernel(B);
            auto C = random_matrix(K.cols(), n0, R, rng, N);
            auto A = K.cols() ? K * C : ZpNMatrix(n1, n0, R);
            auto H = middle_cohomology(A, B);
            const auto& reps = H.representatives();
            EXPECT_TRUE((B * reps).is_zero());
            // Coordinates of representative j are the unit vector e_j.
            for (std::size_t j = 0; j < reps.cols(); ++j) {
                auto c = H.coordinates(reps.column(j));
                for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(c[i], i == j ? 1u : 0u);
            }
            // Coboundaries have zero coordinates.
            for (std::size_t j = 0; j < A.cols(); ++j)
                for (auto v : H.coordinates(A.column(j))) EXPECT_EQ(v, 0u);
            // Group order check: |ker B| / |im A| = prod p^{e_i} (computed via valuations).
            int logk = 0, loga = 0, logh = 0;
            for (auto e : H.exponents()) logh += e;
            auto SB = smith_form(B);
            logk = static_cast<int>(n1 - SB.rank()) * N;
            for (auto v : SB.valuations) logk += v;
            auto SA = smith_form(A);
            for (auto v : SA.valuations) loga += N - v;
            EXPECT_EQ(logh, logk - loga);
        }
    }
}

TEST(MiddleCohomology, LiftingPrecision) {
    // Complexes defined over Z: reducing at N and N+1 gives divisor lists
    // agreeing after truncation at N.
    std::mt19937_64 rng(31);
    for (int t = 0; t < 30; ++t) {
        // d_A d_B diagonal integer complexes with B*A = 0 after a unimodular change.
        ZpN R2(3, 2), R3(3, 3);
        const int n = 4;
        std::vector<std::vector<std::int64_t>> Ad(n, std::vector<std::int64_t>(n, 0)), Bd = Ad;
        for (int i = 0; i < n; ++i) {
            const int kind = rng() % 3;
            const std::int64_t power = std::vector<std::int64_t>{1, 3, 9, 27}[rng() % 4];
            if (kind == 0) Ad[i][i] = power;  // torsion or trivial in the middle
            if (kind == 1) Bd[i][i] = power;  // kills
        }
        // Unimodular integer change of basis g (upper triangular with ones).
        std::vector<std::vector<std::int64_t>> g(n, std::vector<std::int64_t>(n, 0)), gi = g;
        for (int i = 0; i < n; ++i) g[i][i] = gi[i][i] = 1;
        const std::int64_t c = rng() % 5;
        g[0][1] = c;
        gi[0][1] = -c;
        auto mk = [&](const ZpN& R) {
            auto A = ZpNMatrix::from_rows(g, R) * ZpNMatrix::from_rows(Ad, R);
            auto B = ZpNMatrix::from_rows(Bd, R) * ZpNMatrix::from_rows(gi, R);
            return std::pair{A, B};
        };
        // Only consistent complexes (B*A = 0 over Z) are used.
        bool ok = true;
        for (int i = 0; i < n; ++i)
            if (Ad[i][i] && Bd[i][i]) ok = false;
        if (!ok) continue;
        auto [A2, B2] = mk(R2);
        auto [A3, B3] = mk(R3);
        auto e2 = cohomology_exponents(A2, B2), e3 = cohomology_exponents(A3, B3);
        std::vector<int> t3;
        for (int e : e3)
            if (std::min(e, 2) > 0) t3.push_back(std::min(e, 2));
        EXPECT_EQ(e2, t3);
    }
}
