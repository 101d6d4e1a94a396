#pragma once

// Divided-power series R<y_1..y_k> = { sum_K a_K y^K / K! }, truncated at a
// total DP degree, and their evaluation on the canonical DP ideal.
//
// Coefficients are elements of Lambda_B (with zero odd generators for plain
// DP series over B); with odd generators present the same type is the mixed
// ring of elements sum a_{I,J,T} x^I xi^J y^T/T!.

#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "superalgebra.hpp"

namespace dpcrys {

struct DPDeclaration {
    BaseRingPtr base;
    int odd = 0;                  // odd generators of the coefficient ring
    std::vector<std::string> vars;  // DP variables
    int dp_cap = 0;

    bool operator==(const DPDeclaration& o) const {
        return base->same_as(*o.base) && odd == o.odd && vars == o.vars && dp_cap == o.dp_cap;
    }
};

class DPSeries {
public:
    DPSeries() = default;
    explicit DPSeries(DPDeclaration decl) : decl_(std::move(decl)) {
        if (!decl_.base) throw std::invalid_argument("DPSeries: null base ring");
        if (decl_.dp_cap < 0) throw std::invalid_argument("DPSeries: negative DP cap");
    }

    /// Single-variable series from a coefficient list a_0, a_1, ... in Z/p^N.
    static DPSeries from_coefficients(const DPDeclaration& decl, const std::vector<std::int64_t>& a) {
        if (decl.vars.size() != 1) throw std::invalid_argument("DPSeries::from_coefficients: one DP variable expected");
        DPSeries f(decl);
        for (std::size_t i = 0; i < a.size(); ++i) f.set({static_cast<int>(i)}, SuperPoly::constant(decl.base, decl.odd, a[i]));
        return f;
    }
    /// y_v^{[k]}
    static DPSeries dp_power(const DPDeclaration& decl, std::size_t v, int k) {
        DPSeries f(decl);
        Exponents K(decl.vars.size(), 0);
        K.at(v) = k;
        f.set(K, SuperPoly::constant(decl.base, decl.odd, 1));
        return f;
    }
    static DPSeries constant(const DPDeclaration& decl, const SuperPoly& c) {
        DPSeries f(decl);
        f.set(Exponents(decl.vars.size(), 0), c);
        return f;
    }

    const DPDeclaration& declaration() const { return decl_; }
    const std::map<Exponents, SuperPoly>& coefficients() const { return coef_; }
    bool is_zero() const { return coef_.empty(); }
    bool truncated() const { return truncated_; }
    void mark_truncated() { truncated_ = true; }

    SuperPoly coefficient(const Exponents& K) const {
        auto it = coef_.find(K);
        return it == coef_.end() ? SuperPoly(decl_.base, decl_.odd) : it->second;
    }

    /// Sets a_K; multi-indices beyond the DP cap are dropped and flagged.
    void set(const Exponents& K, const SuperPoly& c) {
        if (K.size() != decl_.vars.size()) throw std::invalid_argument("DPSeries: multi-index arity");
        if (std::accumulate(K.begin(), K.end(), 0) > decl_.dp_cap) {
            if (!c.is_zero()) truncated_ = true;
            return;
        }
        if (c.truncated()) truncated_ = true;
        if (c.is_zero())
            coef_.erase(K);
        else
            coef_.insert_or_assign(K, c);
    }

    friend DPSeries operator+(const DPSeries& f, const DPSeries& g) {
        check(f, g);
        DPSeries r = f;
        for (const auto& [K, c] : g.coef_) r.set(K, r.coefficient(K) + c);
        r.truncated_ = f.truncated_ || g.truncated_;
        return r;
    }
    DPSeries operator-() const {
        DPSeries r(decl_);
        for (const auto& [K, c] : coef_) r.set(K, -c);
        r.truncated_ = truncated_;
        return r;
    }
    friend DPSeries operator-(const DPSeries& f, const DPSeries& g) { return f + (-g); }
    friend bool operator==(const DPSeries& f, const DPSeries& g) { return f.decl_ == g.decl_ && f.coef_ == g.coef_; }

    static void check(const DPSeries& f, const DPSeries& g) {
        if (!(f.decl_ == g.decl_)) throw RingMismatchError("DPSeries: operands have different declarations");
    }

private:
    DPDeclaration decl_;
    std::map<Exponents, SuperPoly> coef_;
    bool truncated_ = false;
};

/// Product with coefficient of y^K/K! equal to
///   sum_{I+J=K} prod_v C(K_v, I_v) a_I b_J,
/// integer binomials only.
inline DPSeries dp_mul(const DPSeries& f, const DPSeries& g) {
    DPSeries::check(f, g);
    const auto& decl = f.declaration();
    const ZpN& R = decl.base->coeffs();
    DPSeries r(decl);
    std::map<Exponents, SuperPoly> acc;
    bool dropped = false;
    for (const auto& [I, a] : f.coefficients()) {
        for (const auto& [J, b] : g.coefficients()) {
            Exponents K(I.size());
            int total = 0;
            Residue mult(R, 1);
            for (std::size_t v = 0; v < I.size(); ++v) {
                K[v] = I[v] + J[v];
                total += K[v];
                mult = mult * binomial(K[v], I[v], R);
            }
            if (total > decl.dp_cap) {
                dropped = true;
                continue;
            }
            SuperPoly term = mult * (a * b);
            auto it = acc.find(K);
            if (it == acc.end())
                acc.emplace(K, term);
            else
                it->second += term;
        }
    }
    for (const auto& [K, c] : acc) r.set(K, c);
    if (dropped || f.truncated() || g.truncated()) r.mark_truncated();
    return r;
}

/// Elements of the mixed ring multiply exactly like DP series whose
/// coefficients carry x and xi.
inline DPSeries mixed_ring_mul(const DPSeries& a, const DPSeries& b) { return dp_mul(a, b); }

namespace detail {

inline SuperPoly dp_monomial_value(const Exponents& K, const std::vector<SuperPoly>& e) {
    SuperPoly r = SuperPoly::constant(e.front().ring(), e.front().odd_count(), 1);
    for (std::size_t v = 0; v < K.size(); ++v)
        if (K[v] > 0) r = r * gamma(static_cast<unsigned>(K[v]), e[v]);
    return r;
}

inline void check_args(const DPSeries& f, const std::vector<SuperPoly>& e) {
    if (e.size() != f.declaration().vars.size()) throw std::invalid_argument("evaluate: one element per DP variable expected");
    if (e.empty()) throw std::invalid_argument("evaluate: no DP variables");
    for (const auto& x : e)
        if (!in_dp_ideal(x) || !x.is_even()) throw NotInIdealError("evaluate: argument not an even element of pB + Lambda^+");
}

}  // namespace detail

/// f(e) = sum_K a_K prod_v gamma_{K_v}(e_v) for f with constant coefficients.
inline SuperPoly evaluate(const DPSeries& f, const std::vector<SuperPoly>& e) {
    detail::check_args(f, e);
    SuperPoly r(e.front().ring(), e.front().odd_count());
    for (const auto& [K, a] : f.coefficients()) {
        const SuperPoly& ring_elt = a;
        for (const auto& [k, c] : ring_elt.terms())
            if (k.odd != 0 || std::any_of(k.even.begin(), k.even.end(), [](int x) { return x != 0; }))
                throw std::invalid_argument("evaluate: coefficients must be constants (use relative_evaluate)");
        const Residue a0 = a.coefficient(TermKey{Exponents(a.ring()->nvars(), 0), 0});
        const Residue c = Residue::from_canonical(r.coeffs(), a0.value());
        if (a0.ring().p() != r.coeffs().p() || a0.ring().precision() < r.coeffs().precision())
            throw RingMismatchError("evaluate: coefficient ring does not map to the argument ring");
        r += c * detail::dp_monomial_value(K, e);
    }
    return r;
}
inline SuperPoly evaluate(const DPSeries& f, const SuperPoly& e) { return evaluate(f, std::vector<SuperPoly>{e}); }

/// f(phi, e) = sum_K phi(r_K) prod_v gamma_{K_v}(e_v).
inline SuperPoly relative_evaluate(const DPSeries& f, const LambdaMorphism& phi, const std::vector<SuperPoly>& e) {
    detail::check_args(f, e);
    if (!phi.source()->same_as(*f.declaration().base)) throw RingMismatchError("relative_evaluate: morphism source differs from the series base");
    SuperPoly r(e.front().ring(), e.front().odd_count());
    for (const auto& [K, a] : f.coefficients()) r += phi(a) * detail::dp_monomial_value(K, e);
    return r;
}
inline SuperPoly relative_evaluate(const DPSeries& f, const LambdaMorphism& phi, const SuperPoly& e) {
    return relative_evaluate(f, phi, std::vector<SuperPoly>{e});
}

}  // namespace dpcrys
