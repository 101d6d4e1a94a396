#pragma once

// Black-box functions on Grassmann rings: reading DP coefficients off the
// probe w_n = xi_1 xi_2 + ... + xi_{2n-1} xi_{2n}, sampled naturality checks,
// and invariants of the rotation/pair-swap group.

#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dp_series.hpp"
#include "linalg.hpp"
#include "sampling.hpp"
#include "superalgebra.hpp"

namespace dpcrys {

struct InconsistentReadError : std::domain_error {
    using std::domain_error::domain_error;
};

/// A host-level function on the canonical DP ideal: SuperPoly in, SuperPoly
/// out (in the same ring).
using SuperFunction = std::function<SuperPoly(const SuperPoly&)>;

struct ProbeObject {
    BaseRingPtr ring;
    int n = 0;                            // number of pairs; 2n odd generators
    std::vector<std::pair<int, int>> pairs;  // pairing of the odd generators
    SuperPoly w;

    static ProbeObject canonical(const ZpN& R, int n) {
        std::vector<std::pair<int, int>> pairs;
        for (int i = 0; i < n; ++i) pairs.emplace_back(2 * i, 2 * i + 1);
        return with_pairing(BaseRing::make(R), n, pairs);
    }
    static ProbeObject with_pairing(BaseRingPtr ring, int n, std::vector<std::pair<int, int>> pairs) {
        ProbeObject o{ring, n, std::move(pairs), SuperPoly(ring, 2 * n)};
        for (auto [a, b] : o.pairs) o.w += SuperPoly::odd_product(ring, 2 * n, {a, b});
        return o;
    }

    /// Product of the first i pairs in order; equals w^i/i! restricted to one
    /// monomial, and is +-1 times a sorted basis monomial.
    SuperPoly pair_product(int i) const {
        SuperPoly r = SuperPoly::constant(ring, 2 * n, 1);
        for (int k = 0; k < i; ++k) r = r * SuperPoly::odd_product(ring, 2 * n, {pairs[k].first, pairs[k].second});
        return r;
    }
};

namespace detail {

inline Residue read_coefficient(const SuperPoly& out, const SuperPoly& monomial) {
    // monomial = sign * xi_mask with a single term.
    const auto& [k, c] = *monomial.terms().begin();
    const Residue sign = Residue::from_canonical(out.coeffs(), c);
    return out.coefficient(k) * sign;  // sign^2 = 1
}

inline std::vector<Residue> read_probe(const ProbeObject& P, const SuperPoly& out, int k) {
    std::vector<Residue> a;
    for (int i = 0; i <= k; ++i) a.push_back(read_coefficient(out, P.pair_product(i)));
    // f(w) must be exactly sum a_i gamma_i(w).
    SuperPoly expect(out.ring(), out.odd_count());
    for (int i = 0; i <= k; ++i) expect += a[i] * gamma(static_cast<unsigned>(i), P.w);
    if (!(expect == out)) throw InconsistentReadError("probe: f(w) has monomials outside span{w^i/i!}; f is not natural");
    return a;
}

}  // namespace detail

/// Evaluates f at w_k and returns a_0..a_k.
inline std::vector<Residue> probe_coefficients(const SuperFunction& f, int k, std::uint64_t p, int N) {
    const ProbeObject P = ProbeObject::canonical(ZpN(p, N), k);
    return detail::read_probe(P, f(P.w), k);
}

/// Same probe with a relabelled pairing of the odd generators.
inline std::vector<Residue> probe_coefficients(const SuperFunction& f, const ProbeObject& P) {
    return detail::read_probe(P, f(P.w), P.n);
}

/// Probe at p x + w_k over Z/p^N[x]; a_i is the x-free coefficient of
/// xi_1...xi_{2i}.  Consistency with sum a_i gamma_i(p x + w_k) is enforced.
inline std::vector<Residue> probe_coefficients_mixed(const SuperFunction& f, int k, std::uint64_t p, int N) {
    const ZpN R(p, N);
    BaseRing::Options opt;
    opt.degree_cap = 4 * k + 8;
    auto B = BaseRing::make(R, {"x"}, opt);
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < k; ++i) pairs.emplace_back(2 * i, 2 * i + 1);
    const ProbeObject P = ProbeObject::with_pairing(B, k, pairs);
    const SuperPoly e = Residue(R, static_cast<std::int64_t>(p)) * SuperPoly::even_var(B, 2 * k, 0) + P.w;
    const SuperPoly out = f(e);
    std::vector<Residue> a;
    for (int i = 0; i <= k; ++i) a.push_back(detail::read_coefficient(out, P.pair_product(i)));
    SuperPoly expect(B, 2 * k);
    for (int i = 0; i <= k; ++i) expect += a[i] * gamma(static_cast<unsigned>(i), e);
    if (!(expect == out)) throw InconsistentReadError("mixed probe: f(p x + w) is not determined by the read coefficients");
    return a;
}

/// The function e -> f(e) for a single-variable DP series with constant
/// coefficients.
inline SuperFunction dp_series_function(const DPSeries& f) {
    return [f](const SuperPoly& e) { return evaluate(f, e); };
}

/// A "power series" sum c_i e^i built by inverting i! in Z/p^N.  Fails for
/// i >= p since i! is then a zero divisor.
inline SuperFunction raw_inverse_factorial_series(const ZpN& R, int terms) {
    std::vector<std::uint64_t> c;
    for (int i = 0; i < terms; ++i) c.push_back(R.inv(factorial_ratio(static_cast<std::uint64_t>(i), 0, R).value()));
    return [c](const SuperPoly& e) {
        SuperPoly r(e.ring(), e.odd_count()), pw = SuperPoly::constant(e.ring(), e.odd_count(), 1);
        for (std::size_t i = 0; i < c.size(); ++i) {
            r += Residue::from_canonical(e.coeffs(), c[i]) * pw;
            pw = pw * e;
        }
        return r;
    };
}

struct NaturalityReport {
    bool pass = true;
    int checked = 0;
    std::string witness;  // first failure, if any
};

/// Samples random morphisms phi: Lambda_B -> Lambda_C and ideal elements e of
/// Lambda_B and checks f(phi(e)) == phi(f(e)).
inline NaturalityReport naturality_check(const SuperFunction& f, int samples, std::uint64_t p, int N, std::uint64_t seed,
                                         SampleShape shape = {1, 3, 4}) {
    NaturalityReport rep;
    Sampler S(seed);
    const ZpN R(p, N);
    BaseRing::Options opt;
    opt.degree_cap = 24;
    auto B = BaseRing::make(R, {"x"}, opt);
    auto C = BaseRing::make(R, {"u", "v"}, opt);
    for (int t = 0; t < samples; ++t) {
        const int m = 2 + static_cast<int>(S.uniform(0, 2));
        const int mc = 2 + static_cast<int>(S.uniform(0, 3));
        LambdaMorphism phi = S.morphism(B, m, C, mc, shape);
        SuperPoly e = S.ideal_element(B, m, shape);
        const SuperPoly lhs = f(phi(e)), rhs = phi(f(e));
        ++rep.checked;
        if (!(lhs == rhs)) {
            rep.pass = false;
            std::ostringstream os;
            os << "sample " << t << ": e = " << e.to_string() << "; f(phi(e)) = " << lhs.to_string()
               << "; phi(f(e)) = " << rhs.to_string();
            rep.witness = os.str();
            return rep;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// G-invariants of Lambda_{Z/p^N}[xi_1..xi_{2n}]

/// Rotations xi_{2k-1} -> xi_{2k}, xi_{2k} -> -xi_{2k-1} and swaps of
/// adjacent pairs, as ring automorphisms.
inline std::vector<LambdaMorphism> invariant_group_generators(const BaseRingPtr& B, int n) {
    std::vector<LambdaMorphism> gens;
    const int m = 2 * n;
    auto gen = [&](int j) { return SuperPoly::odd_gen(B, m, j); };
    for (int k = 0; k < n; ++k) {
        std::vector<SuperPoly> od;
        for (int j = 0; j < m; ++j) od.push_back(gen(j));
        od[2 * k] = gen(2 * k + 1);
        od[2 * k + 1] = -gen(2 * k);
        gens.emplace_back(B, m, B, m, std::vector<SuperPoly>{}, od);
    }
    for (int k = 0; k + 1 < n; ++k) {
        std::vector<SuperPoly> od;
        for (int j = 0; j < m; ++j) od.push_back(gen(j));
        std::swap(od[2 * k], od[2 * k + 2]);
        std::swap(od[2 * k + 1], od[2 * k + 3]);
        gens.emplace_back(B, m, B, m, std::vector<SuperPoly>{}, od);
    }
    return gens;
}

struct InvariantResult {
    std::vector<SuperPoly> basis;  // Howell-reduced kernel basis
    std::vector<SuperPoly> expected;  // w_n^k / k!, k = 0..n
    bool matches_expected = false;
    bool free = false;  // every Howell pivot is a unit
};

inline InvariantResult g_invariants(int n, std::uint64_t p, int N) {
    if (n < 0 || n > 4) throw std::invalid_argument("g_invariants: n must be in 0..4");
    const ZpN R(p, N);
    const ProbeObject P = ProbeObject::canonical(R, n);
    const auto& B = P.ring;
    const int m = 2 * n;
    const std::size_t dim = std::size_t{1} << m;
    auto coords = [&](const SuperPoly& a) {
        std::vector<std::uint64_t> v(dim, 0);
        for (const auto& [k, c] : a.terms()) v[k.odd] = c;
        return v;
    };
    auto basis_elt = [&](std::uint32_t mask) { return SuperPoly::monomial(B, m, {}, mask, 1); };

    const auto gens = invariant_group_generators(B, n);
    ZpNMatrix M(gens.size() * dim, dim, R);
    for (std::size_t g = 0; g < gens.size(); ++g) {
        for (std::uint32_t mask = 0; mask < dim; ++mask) {
            auto img = coords(gens[g](basis_elt(mask)) - basis_elt(mask));
            for (std::size_t i = 0; i < dim; ++i) M(g * dim + i, mask) = img[i];
        }
    }
    ZpNMatrix K = gens.empty() ? ZpNMatrix::identity(dim, R) : kernel(M);
    const ZpNMatrix H = howell_form(K.transpose()).H;

    InvariantResult res;
    res.free = true;
    for (std::size_t r = 0; r < H.rows(); ++r) {
        SuperPoly b(B, m);
        bool pivot_seen = false;
        for (std::size_t i = 0; i < dim; ++i) {
            if (H(r, i) == 0) continue;
            if (!pivot_seen) {
                pivot_seen = true;
                if (!R.is_unit(H(r, i))) res.free = false;
            }
            b.add_term(TermKey{{}, static_cast<std::uint32_t>(i)}, H(r, i));
        }
        res.basis.push_back(b);
    }
    for (int k = 0; k <= n; ++k) res.expected.push_back(gamma(static_cast<unsigned>(k), P.w));

    // Equal spans: mutual membership.
    ZpNMatrix E(res.expected.size(), dim, R);
    for (std::size_t r = 0; r < res.expected.size(); ++r) {
        auto v = coords(res.expected[r]);
        std::copy(v.begin(), v.end(), E.row(r));
    }
    bool ok = H.rows() == res.expected.size();
    for (std::size_t r = 0; ok && r < E.rows(); ++r) ok = in_row_span(H, coords(res.expected[r]));
    for (std::size_t r = 0; ok && r < H.rows(); ++r) ok = in_row_span(E, std::vector<std::uint64_t>(H.row(r), H.row(r) + dim));
    res.matches_expected = ok;
    return res;
}

}  // namespace dpcrys
