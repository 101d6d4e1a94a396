#pragma once

// Supercommutative polynomial rings Lambda_B = B[xi_1..xi_m] over base rings
// B finitely generated over Z/p^N, the canonical ideal pB + Lambda_B^+ and its
// divided powers.

#include <bit>
#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "padic.hpp"

namespace dpcrys {

struct RingMismatchError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct NotInIdealError : std::domain_error {
    using std::domain_error::domain_error;
};
struct ParityError : std::domain_error {
    using std::domain_error::domain_error;
};
struct MorphismError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

using Exponents = std::vector<int>;

/// x^lead -> tail.  Tail monomials are expected to be smaller than lead in
/// degree order so that rewriting terminates.
struct RewriteRule {
    Exponents lead;
    std::map<Exponents, std::int64_t> tail;
};

/// A commutative base ring Z/p^N[x_1..x_r] / (rewrite rules), truncated at a
/// total degree cap.  Localized variables admit negative exponents down to
/// -neg_cap.
class BaseRing {
public:
    struct Options {
        int degree_cap = 64;
        int neg_cap = 0;
        std::vector<bool> localized;
        std::vector<RewriteRule> rules;
    };

    static std::shared_ptr<const BaseRing> make(ZpN coeffs, std::vector<std::string> vars, Options opt) {
        return std::shared_ptr<const BaseRing>(new BaseRing(coeffs, std::move(vars), std::move(opt)));
    }
    static std::shared_ptr<const BaseRing> make(ZpN coeffs, std::vector<std::string> vars = {}) {
        return make(coeffs, std::move(vars), Options{});
    }

    const ZpN& coeffs() const { return coeffs_; }
    std::size_t nvars() const { return vars_.size(); }
    const std::vector<std::string>& vars() const { return vars_; }
    int degree_cap() const { return opt_.degree_cap; }
    int neg_cap() const { return opt_.neg_cap; }
    bool localized(std::size_t i) const { return i < opt_.localized.size() && opt_.localized[i]; }
    const std::vector<RewriteRule>& rules() const { return opt_.rules; }

    /// Shipped constructions (free polynomial rings) satisfy the category
    /// hypothesis on B/pB; rings given by arbitrary rules are not checked.
    bool reducedness_unchecked() const { return !opt_.rules.empty(); }

    /// Whether a monomial survives the truncation window.
    bool in_window(const Exponents& e) const {
        int pos = 0;
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] < 0) {
                if (!localized(i) || -e[i] > opt_.neg_cap) return false;
            } else {
                pos += e[i];
            }
        }
        return pos <= opt_.degree_cap;
    }

    bool same_as(const BaseRing& o) const {
        return this == &o || (coeffs_ == o.coeffs_ && vars_ == o.vars_ && opt_.degree_cap == o.opt_.degree_cap &&
                              opt_.neg_cap == o.opt_.neg_cap && opt_.localized == o.opt_.localized &&
                              opt_.rules.size() == o.opt_.rules.size());
    }

private:
    BaseRing(ZpN c, std::vector<std::string> v, Options o) : coeffs_(c), vars_(std::move(v)), opt_(std::move(o)) {
        for (const auto& r : opt_.rules)
            if (r.lead.size() != vars_.size()) throw std::invalid_argument("BaseRing: rule arity mismatch");
    }
    ZpN coeffs_;
    std::vector<std::string> vars_;
    Options opt_;
};

using BaseRingPtr = std::shared_ptr<const BaseRing>;

enum class Parity { Zero, Even, Odd, Mixed };

/// Sign of xi_A * xi_B rewritten in sorted order, 0 when a generator repeats.
inline int odd_product_sign(std::uint32_t a, std::uint32_t b) {
    if (a & b) return 0;
    int inversions = 0;
    for (std::uint32_t bb = b; bb; bb &= bb - 1) {
        const int j = std::countr_zero(bb);
        inversions += std::popcount(a >> (j + 1));
    }
    return (inversions & 1) ? -1 : 1;
}

struct TermKey {
    Exponents even;
    std::uint32_t odd = 0;
    friend auto operator<=>(const TermKey&, const TermKey&) = default;
    friend bool operator==(const TermKey&, const TermKey&) = default;
};

/// An element of Lambda_B with m odd generators.
class SuperPoly {
public:
    SuperPoly() = default;
    SuperPoly(BaseRingPtr ring, int odd_count) : ring_(std::move(ring)), m_(odd_count) {
        if (!ring_) throw std::invalid_argument("SuperPoly: null ring");
        if (m_ < 0 || m_ > 32) throw std::invalid_argument("SuperPoly: at most 32 odd generators");
    }

    static SuperPoly constant(BaseRingPtr ring, int m, std::int64_t c) {
        SuperPoly r(ring, m);
        r.add_term(TermKey{Exponents(ring->nvars(), 0), 0}, ring->coeffs().reduce(c));
        return r;
    }
    static SuperPoly constant(BaseRingPtr ring, int m, const Residue& c) {
        SuperPoly r(ring, m);
        r.add_term(TermKey{Exponents(ring->nvars(), 0), 0}, c.value() % ring->coeffs().modulus());
        return r;
    }
    static SuperPoly even_var(BaseRingPtr ring, int m, std::size_t i, int power = 1) {
        Exponents e(ring->nvars(), 0);
        e.at(i) = power;
        return monomial(ring, m, e, 0, 1);
    }
    static SuperPoly odd_gen(BaseRingPtr ring, int m, int j) {
        if (j < 0 || j >= m) throw std::out_of_range("SuperPoly: odd generator index");
        return monomial(ring, m, Exponents(ring->nvars(), 0), std::uint32_t{1} << j, 1);
    }
    /// Product of odd generators in the listed order, e.g. {1,0} -> xi_2 xi_1.
    static SuperPoly odd_product(BaseRingPtr ring, int m, const std::vector<int>& gens) {
        SuperPoly r = constant(ring, m, 1);
        for (int j : gens) r = r * odd_gen(ring, m, j);
        return r;
    }
    static SuperPoly monomial(BaseRingPtr ring, int m, Exponents e, std::uint32_t odd, std::int64_t c) {
        SuperPoly r(ring, m);
        r.add_term(TermKey{std::move(e), odd}, ring->coeffs().reduce(c));
        r.normalize();
        return r;
    }

    const BaseRingPtr& ring() const { return ring_; }
    const ZpN& coeffs() const { return ring_->coeffs(); }
    int odd_count() const { return m_; }
    const std::map<TermKey, std::uint64_t>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    /// Set when a product dropped monomials outside the degree window.
    bool truncated() const { return truncated_; }

    Residue coefficient(const TermKey& k) const {
        auto it = terms_.find(k);
        return Residue::from_canonical(coeffs(), it == terms_.end() ? 0 : it->second);
    }
    Residue coefficient_of_odd(std::uint32_t odd) const { return coefficient(TermKey{Exponents(ring_->nvars(), 0), odd}); }

    Parity parity() const {
        if (terms_.empty()) return Parity::Zero;
        bool even = false, odd = false;
        for (const auto& [k, c] : terms_) (std::popcount(k.odd) & 1 ? odd : even) = true;
        if (even && odd) return Parity::Mixed;
        return even ? Parity::Even : Parity::Odd;
    }
    bool is_even() const { auto p = parity(); return p == Parity::Even || p == Parity::Zero; }
    bool is_odd() const { auto p = parity(); return p == Parity::Odd || p == Parity::Zero; }

    /// Terms with no odd generator.
    SuperPoly xi_free_part() const {
        SuperPoly r(ring_, m_);
        for (const auto& [k, c] : terms_)
            if (k.odd == 0) r.terms_.emplace(k, c);
        return r;
    }
    SuperPoly xi_part() const {
        SuperPoly r(ring_, m_);
        for (const auto& [k, c] : terms_)
            if (k.odd != 0) r.terms_.emplace(k, c);
        return r;
    }

    SuperPoly operator-() const {
        SuperPoly r = *this;
        for (auto& [k, c] : r.terms_) c = coeffs().neg(c);
        return r;
    }
    friend SuperPoly operator+(const SuperPoly& a, const SuperPoly& b) {
        check(a, b);
        SuperPoly r = a;
        for (const auto& [k, c] : b.terms_) r.add_term(k, c);
        r.truncated_ = a.truncated_ || b.truncated_;
        return r;
    }
    friend SuperPoly operator-(const SuperPoly& a, const SuperPoly& b) { return a + (-b); }
    friend SuperPoly operator*(const SuperPoly& a, const SuperPoly& b) {
        check(a, b);
        SuperPoly r(a.ring_, a.m_);
        const ZpN& R = a.coeffs();
        const std::size_t n = a.ring_->nvars();
        for (const auto& [ka, ca] : a.terms_) {
            for (const auto& [kb, cb] : b.terms_) {
                const int s = odd_product_sign(ka.odd, kb.odd);
                if (s == 0) continue;
                TermKey k{Exponents(n), ka.odd | kb.odd};
                for (std::size_t i = 0; i < n; ++i) k.even[i] = ka.even[i] + kb.even[i];
                const std::uint64_t c = R.mul(ca, cb);
                r.add_term(std::move(k), s > 0 ? c : R.neg(c));
            }
        }
        r.truncated_ = a.truncated_ || b.truncated_;
        r.normalize();
        return r;
    }
    friend SuperPoly operator*(const Residue& s, const SuperPoly& a) {
        SuperPoly r(a.ring_, a.m_);
        r.truncated_ = a.truncated_;
        const std::uint64_t sv = s.value() % a.coeffs().modulus();
        for (const auto& [k, c] : a.terms_) r.add_term(k, a.coeffs().mul(sv, c));
        return r;
    }
    SuperPoly& operator+=(const SuperPoly& o) { return *this = *this + o; }
    SuperPoly& operator-=(const SuperPoly& o) { return *this = *this - o; }
    SuperPoly& operator*=(const SuperPoly& o) { return *this = *this * o; }

    SuperPoly pow(unsigned e) const {
        SuperPoly r = constant(ring_, m_, 1);
        for (unsigned i = 0; i < e; ++i) r = r * *this;
        return r;
    }

    /// Equality of values; the truncation flag is not compared.
    friend bool operator==(const SuperPoly& a, const SuperPoly& b) {
        return a.m_ == b.m_ && a.ring_->same_as(*b.ring_) && a.terms_ == b.terms_;
    }

    std::string to_string() const {
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [k, c] : terms_) {
            if (!first) os << " + ";
            first = false;
            os << c;
            for (std::size_t i = 0; i < k.even.size(); ++i)
                if (k.even[i] != 0) os << "*" << ring_->vars()[i] << (k.even[i] != 1 ? "^" + std::to_string(k.even[i]) : "");
            for (int j = 0; j < m_; ++j)
                if (k.odd >> j & 1u) os << "*xi" << (j + 1);
        }
        return os.str();
    }

    /// Direct term insertion (coefficient canonical); used by module code.
    void add_term(TermKey k, std::uint64_t c) {
        if (c == 0) return;
        auto [it, fresh] = terms_.try_emplace(std::move(k), c);
        if (!fresh) {
            it->second = coeffs().add(it->second, c);
            if (it->second == 0) terms_.erase(it);
        }
    }
    void mark_truncated() { truncated_ = true; }

private:
    static void check(const SuperPoly& a, const SuperPoly& b) {
        if (!a.ring_ || !b.ring_ || !a.ring_->same_as(*b.ring_) || a.m_ != b.m_)
            throw RingMismatchError("SuperPoly: operands live in different rings");
    }

    // Apply rewrite rules and the truncation window.
    void normalize() {
        const auto& rules = ring_->rules();
        if (!rules.empty()) {
            for (int guard = 0; guard < 100000; ++guard) {
                bool changed = false;
                for (auto it = terms_.begin(); it != terms_.end(); ++it) {
                    for (const auto& rule : rules) {
                        bool divisible = true;
                        for (std::size_t i = 0; i < rule.lead.size(); ++i)
                            if (it->first.even[i] < rule.lead[i]) divisible = false;
                        if (!divisible) continue;
                        TermKey base = it->first;
                        for (std::size_t i = 0; i < rule.lead.size(); ++i) base.even[i] -= rule.lead[i];
                        const std::uint64_t c = it->second;
                        terms_.erase(it);
                        for (const auto& [te, tc] : rule.tail) {
                            TermKey k = base;
                            for (std::size_t i = 0; i < te.size(); ++i) k.even[i] += te[i];
                            add_term(std::move(k), coeffs().mul(c, coeffs().reduce(tc)));
                        }
                        changed = true;
                        break;
                    }
                    if (changed) break;
                }
                if (!changed) break;
            }
        }
        for (auto it = terms_.begin(); it != terms_.end();) {
            if (!ring_->in_window(it->first.even)) {
                it = terms_.erase(it);
                truncated_ = true;
            } else {
                ++it;
            }
        }
    }

    BaseRingPtr ring_;
    int m_ = 0;
    std::map<TermKey, std::uint64_t> terms_;
    bool truncated_ = false;
};

// ---------------------------------------------------------------------------
// The canonical DP ideal pB + Lambda_B^+

/// True iff the xi-free part lies in pB.  Odd elements are members too.
inline bool in_dp_ideal(const SuperPoly& a) {
    for (const auto& [k, c] : a.terms())
        if (k.odd == 0 && a.coeffs().is_unit(c)) return false;
    return true;
}

/// gamma_n on the canonical DP ideal.  Writing a = p*c + sum_i e_i with e_i
/// the xi-monomial terms (each squares to zero),
///   gamma_n(a) = sum_{n0 + |S| = n} (p^n0/n0!) c^n0 prod_{i in S} e_i.
inline SuperPoly gamma(unsigned n, const SuperPoly& a) {
    if (!a.is_even()) throw ParityError("gamma: input must be even");
    if (!in_dp_ideal(a)) throw NotInIdealError("gamma: input not in pB + Lambda^+");
    const auto& ring = a.ring();
    const int m = a.odd_count();
    const ZpN& R = a.coeffs();

    SuperPoly c(ring, m);
    const SuperPoly body = a.xi_free_part(), nil = a.xi_part();
    for (const auto& [k, v] : body.terms()) c.add_term(k, R.div_p_pow(v, 1));

    // elementary[j] = sum over j-subsets S of prod_{i in S} e_i, built one
    // term at a time; only indices <= n are needed.
    std::vector<SuperPoly> elementary(n + 1, SuperPoly(ring, m));
    elementary[0] = SuperPoly::constant(ring, m, 1);
    for (const auto& [k, v] : nil.terms()) {
        SuperPoly e(ring, m);
        e.add_term(k, v);
        for (unsigned j = n; j >= 1; --j) {
            if (!elementary[j - 1].is_zero()) elementary[j] += elementary[j - 1] * e;
        }
    }

    SuperPoly result(ring, m);
    SuperPoly c_pow = SuperPoly::constant(ring, m, 1);
    for (unsigned n0 = 0; n0 <= n; ++n0) {
        if (n0 > 0) c_pow = c_pow * c;
        const Residue coef = divided_power_of_p(n0, R);
        const SuperPoly& e = elementary[n - n0];
        if (coef.is_zero() || e.is_zero()) continue;
        result += coef * (c_pow * e);
    }
    if (a.truncated()) result.mark_truncated();
    return result;
}

// ---------------------------------------------------------------------------
// Parity-preserving morphisms Lambda_B -> Lambda_C

class LambdaMorphism {
public:
    /// Validates parity of every image and that source rules map to zero.
    LambdaMorphism(BaseRingPtr source, int source_odd, BaseRingPtr target, int target_odd,
                   std::vector<SuperPoly> even_images, std::vector<SuperPoly> odd_images)
        : source_(std::move(source)), source_odd_(source_odd), even_(std::move(even_images)),
          odd_(std::move(odd_images)), target_(std::move(target)), target_odd_(target_odd) {
        if (even_.size() != source_->nvars()) throw MorphismError("LambdaMorphism: wrong number of even images");
        if (static_cast<int>(odd_.size()) != source_odd_) throw MorphismError("LambdaMorphism: wrong number of odd images");
        if (target_->coeffs().p() != source_->coeffs().p() ||
            target_->coeffs().precision() > source_->coeffs().precision())
            throw MorphismError("LambdaMorphism: no structure map between coefficient rings");
        for (std::size_t i = 0; i < source_->nvars(); ++i)
            if (source_->localized(i)) throw MorphismError("LambdaMorphism: localized source variables unsupported");
        for (const auto& e : even_) {
            if (!e.ring()->same_as(*target_) || e.odd_count() != target_odd_) throw MorphismError("LambdaMorphism: images in different rings");
            if (!e.is_even()) throw MorphismError("LambdaMorphism: even variable sent to a non-even element");
        }
        for (const auto& o : odd_) {
            if (!o.ring()->same_as(*target_) || o.odd_count() != target_odd_) throw MorphismError("LambdaMorphism: images in different rings");
            if (!o.is_odd()) throw MorphismError("LambdaMorphism: odd generator sent to a non-odd element");
        }
        for (const auto& rule : source_->rules()) {
            SuperPoly lhs = image_of_monomial(rule.lead, 0, 1);
            SuperPoly rhs(target_, target_odd_);
            for (const auto& [e, c] : rule.tail) rhs += image_of_monomial(e, 0, c);
            if (!(lhs - rhs).is_zero()) throw MorphismError("LambdaMorphism: a relation of the source does not map to zero");
        }
    }

    static LambdaMorphism identity(BaseRingPtr ring, int m) {
        std::vector<SuperPoly> ev, od;
        for (std::size_t i = 0; i < ring->nvars(); ++i) ev.push_back(SuperPoly::even_var(ring, m, i));
        for (int j = 0; j < m; ++j) od.push_back(SuperPoly::odd_gen(ring, m, j));
        return LambdaMorphism(ring, m, ring, m, std::move(ev), std::move(od));
    }

    const BaseRingPtr& source() const { return source_; }
    const BaseRingPtr& target() const { return target_; }
    int target_odd() const { return target_odd_; }
    const std::vector<SuperPoly>& even_images() const { return even_; }
    const std::vector<SuperPoly>& odd_images() const { return odd_; }

    SuperPoly operator()(const SuperPoly& a) const {
        if (!a.ring()->same_as(*source_) || a.odd_count() != source_odd_)
            throw RingMismatchError("LambdaMorphism: argument not in the source ring");
        SuperPoly r(target_, target_odd_);
        for (const auto& [k, c] : a.terms()) r += image_of_monomial(k.even, k.odd, static_cast<std::int64_t>(c));
        return r;
    }

private:
    SuperPoly image_of_monomial(const Exponents& e, std::uint32_t odd, std::int64_t c) const {
        SuperPoly r = SuperPoly::constant(target_, target_odd_, c);
        for (std::size_t i = 0; i < e.size(); ++i)
            for (int t = 0; t < e[i]; ++t) r = r * even_[i];
        for (int j = 0; j < source_odd_; ++j)
            if (odd >> j & 1u) r = r * odd_[j];
        return r;
    }

    BaseRingPtr source_;
    int source_odd_ = 0;
    std::vector<SuperPoly> even_, odd_;
    BaseRingPtr target_;
    int target_odd_ = 0;
};

inline SuperPoly apply_morphism(const LambdaMorphism& phi, const SuperPoly& a) { return phi(a); }

}  // namespace dpcrys
