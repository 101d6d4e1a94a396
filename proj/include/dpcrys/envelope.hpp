#pragma once

// Algebra of DP envelopes D = A<g> of affine chart rings A (one or two
// ambient variables, possibly localized) and their de Rham forms
// D (x) Lambda(dx_1, dx_2).  Elements are stored on the normal form
//   x^e g^[k] dx^J,   e_r < deg_r  (r the reduction variable),
// obtained by rewriting r^deg = (g - rest)/c.  Without a relation the
// envelope is A itself (level k = 0 only).

#include <array>
#include <bit>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "padic.hpp"
#include "superalgebra.hpp"

namespace dpcrys {

struct ClosureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CapExceededError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct OverflowError : std::overflow_error {
    using std::overflow_error::overflow_error;
};

using Exp2 = std::array<int, 2>;

/// Exact polynomials over Z in at most two variables.
using IntPoly = std::map<Exp2, __int128>;

namespace intpoly {

inline __int128 checked_mul(__int128 a, __int128 b) {
    __int128 r;
    if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("integer model: coefficient overflow");
    return r;
}
inline __int128 checked_add(__int128 a, __int128 b) {
    __int128 r;
    if (__builtin_add_overflow(a, b, &r)) throw OverflowError("integer model: coefficient overflow");
    return r;
}
inline void add_term(IntPoly& P, const Exp2& e, __int128 c) {
    if (c == 0) return;
    auto [it, fresh] = P.try_emplace(e, c);
    if (!fresh) {
        it->second = checked_add(it->second, c);
        if (it->second == 0) P.erase(it);
    }
}
inline IntPoly mul(const IntPoly& a, const IntPoly& b) {
    IntPoly r;
    for (const auto& [ea, ca] : a)
        for (const auto& [eb, cb] : b) add_term(r, {ea[0] + eb[0], ea[1] + eb[1]}, checked_mul(ca, cb));
    return r;
}
inline IntPoly pow(const IntPoly& a, unsigned n) {
    IntPoly r{{{0, 0}, 1}};
    for (unsigned i = 0; i < n; ++i) r = mul(r, a);
    return r;
}
inline IntPoly sub(IntPoly a, const IntPoly& b) {
    for (const auto& [e, c] : b) add_term(a, e, -c);
    return a;
}
/// g(x^p, y^p)
inline IntPoly frobenius_substitute(const IntPoly& g, int p) {
    IntPoly r;
    for (const auto& [e, c] : g) add_term(r, {e[0] * p, e[1] * p}, c);
    return r;
}
inline IntPoly derivative(const IntPoly& g, int var) {
    IntPoly r;
    for (const auto& [e, c] : g) {
        if (e[var] == 0) continue;
        Exp2 f = e;
        f[var] -= 1;
        add_term(r, f, checked_mul(c, e[var]));
    }
    return r;
}
/// Exact division by an integer; throws when some coefficient is not divisible.
inline IntPoly divide_exact(const IntPoly& a, __int128 d) {
    IntPoly r;
    for (const auto& [e, c] : a) {
        if (c % d != 0) throw std::logic_error("integer model: inexact division");
        r.emplace(e, c / d);
    }
    return r;
}

}  // namespace intpoly

struct EnvKey {
    Exp2 e{0, 0};
    int k = 0;             // DP level: g^[k]
    std::uint32_t odd = 0; // bit i = dx_i
    friend auto operator<=>(const EnvKey&, const EnvKey&) = default;
    friend bool operator==(const EnvKey&, const EnvKey&) = default;
    int degree() const { return std::popcount(odd); }
};

using EnvTerms = std::map<EnvKey, std::uint64_t>;

/// An affine chart and its envelope algebra, independent of any truncation
/// window.
struct EnvChart {
    std::string name;
    std::vector<std::string> vars;  // one or two ambient variables
    std::array<bool, 2> localized{false, false};
    // Relation g = red_coef * r^red_deg + rest, r = vars[red_var].
    bool has_relation = false;
    IntPoly g;
    int red_var = 0;
    int red_deg = 0;
    std::int64_t red_coef = 1;
    IntPoly rest;

    int nvars() const { return static_cast<int>(vars.size()); }

    static EnvChart free_chart(std::string name, std::vector<std::string> vars, std::array<bool, 2> loc) {
        EnvChart c;
        c.name = std::move(name);
        c.vars = std::move(vars);
        c.localized = loc;
        return c;
    }
    /// g must contain red_coef * r^red_deg as its only term of r-degree >=
    /// red_deg, with red_coef = +-1.
    static EnvChart with_relation(std::string name, std::vector<std::string> vars, std::array<bool, 2> loc, IntPoly g,
                                  int red_var, int red_deg) {
        EnvChart c = free_chart(std::move(name), std::move(vars), loc);
        c.has_relation = true;
        c.g = g;
        c.red_var = red_var;
        c.red_deg = red_deg;
        bool found = false;
        for (const auto& [e, coef] : g) {
            if (e[red_var] >= red_deg) {
                Exp2 lead{0, 0};
                lead[red_var] = red_deg;
                if (e != lead || found) throw std::invalid_argument("EnvChart: relation not monic in the reduction variable");
                if (coef != 1 && coef != -1) throw std::invalid_argument("EnvChart: leading coefficient must be +-1");
                c.red_coef = static_cast<std::int64_t>(coef);
                found = true;
            } else {
                c.rest.emplace(e, coef);
            }
        }
        if (!found) throw std::invalid_argument("EnvChart: relation lacks the reduction monomial");
        return c;
    }
};

/// Arithmetic of an EnvChart over Z/p^N together with the quotient Q_s:
/// forms of degree j keep DP levels k <= s - 1 - j (charts with a relation).
class Envelope {
public:
    Envelope(const EnvChart& chart, const ZpN& R, int s) : chart_(chart), R_(R), s_(s) {
        const int p = static_cast<int>(R.p());
        if (chart_.has_relation) {
            const IntPoly gp = intpoly::pow(chart_.g, static_cast<unsigned>(p));
            const IntPoly v = intpoly::divide_exact(intpoly::sub(intpoly::frobenius_substitute(chart_.g, p), gp), p);
            v_ = to_terms(v);
            for (int i = 0; i < chart_.nvars(); ++i) dg_.push_back(to_terms(intpoly::derivative(chart_.g, i)));
            rest_ = to_terms(chart_.rest);
            red_inv_ = R.reduce(chart_.red_coef);  // +-1 is its own inverse
        }
        v_exact_ = chart_.has_relation;
    }

    const EnvChart& chart() const { return chart_; }
    const ZpN& ring() const { return R_; }
    int s() const { return s_; }

    /// Largest DP level kept in form degree j; -1 if none.
    int max_level(int j) const { return chart_.has_relation ? s_ - 1 - j : 0; }

    bool is_normal(const EnvKey& k) const {
        for (int i = chart_.nvars(); i < 2; ++i)
            if (k.e[i] != 0) return false;
        for (int i = 0; i < chart_.nvars(); ++i)
            if (k.e[i] < 0 && !chart_.localized[i]) return false;
        if (chart_.has_relation && k.e[chart_.red_var] >= chart_.red_deg) return false;
        return k.k >= 0 && k.k <= max_level(k.degree());
    }

    static void add(EnvTerms& T, const EnvKey& k, std::uint64_t c, const ZpN& R) {
        if (c == 0) return;
        auto [it, fresh] = T.try_emplace(k, c);
        if (!fresh) {
            it->second = R.add(it->second, c);
            if (it->second == 0) T.erase(it);
        }
    }
    void add(EnvTerms& T, const EnvKey& k, std::uint64_t c) const { add(T, k, c, R_); }

    /// Product of two raw elements: monomials multiply, DP levels combine by
    /// g^[a] g^[b] = C(a+b, a) g^[a+b], odd parts with Koszul signs.
    EnvTerms mul(const EnvTerms& a, const EnvTerms& b) const {
        EnvTerms r;
        for (const auto& [ka, ca] : a)
            for (const auto& [kb, cb] : b) {
                const int sgn = odd_product_sign(ka.odd, kb.odd);
                if (sgn == 0) continue;
                EnvKey k{{ka.e[0] + kb.e[0], ka.e[1] + kb.e[1]}, ka.k + kb.k, ka.odd | kb.odd};
                if (k.k > max_level(k.degree()) && chart_.has_relation) continue;
                std::uint64_t c = R_.mul(ca, cb);
                if (ka.k && kb.k) c = R_.mul(c, binomial(k.k, ka.k, R_).value());
                add(r, k, sgn > 0 ? c : R_.neg(c));
            }
        return r;
    }

    /// Rewrite into normal form; levels above the cap are exact zeros of Q_s.
    EnvTerms normalize(EnvTerms T) const {
        EnvTerms out;
        const int rv = chart_.red_var;
        while (!T.empty()) {
            auto it = T.begin();
            const EnvKey key = it->first;
            const std::uint64_t c = it->second;
            T.erase(it);
            if (chart_.has_relation && key.k > max_level(key.degree())) continue;
            if (!chart_.has_relation || key.e[rv] < chart_.red_deg) {
                add(out, key, c);
                continue;
            }
            // r^deg X g^[k] = c^{-1} ((k+1) X g^[k+1] - rest X g^[k])
            EnvKey base = key;
            base.e[rv] -= chart_.red_deg;
            const std::uint64_t cc = R_.mul(c, red_inv_);
            EnvKey up = base;
            up.k += 1;
            add(T, up, R_.mul(cc, R_.reduce(key.k + 1)));
            for (const auto& [rk, rc] : rest_) {
                EnvKey t = base;
                t.e[0] += rk.e[0];
                t.e[1] += rk.e[1];
                add(T, t, R_.neg(R_.mul(cc, rc)));
            }
        }
        return out;
    }

    /// Exterior derivative of a normal-form element.
    EnvTerms d(const EnvTerms& T) const {
        EnvTerms raw;
        for (const auto& [key, c] : T) {
            for (int i = 0; i < chart_.nvars(); ++i) {
                const std::uint32_t bit = std::uint32_t{1} << i;
                if (key.odd & bit) continue;
                const int sgn = odd_product_sign(bit, key.odd);
                // d(x^e) part
                if (key.e[i] != 0) {
                    EnvKey k = key;
                    k.e[i] -= 1;
                    k.odd |= bit;
                    const std::uint64_t v = R_.mul(c, R_.reduce(key.e[i]));
                    add(raw, k, sgn > 0 ? v : R_.neg(v));
                }
                // g^[k-1] dg part
                if (chart_.has_relation && key.k > 0) {
                    for (const auto& [dk, dc] : dg_[i]) {
                        EnvKey k{{key.e[0] + dk.e[0], key.e[1] + dk.e[1]}, key.k - 1, key.odd | bit};
                        const std::uint64_t v = R_.mul(c, dc);
                        add(raw, k, sgn > 0 ? v : R_.neg(v));
                    }
                }
            }
        }
        return normalize(std::move(raw));
    }

    /// Frobenius lift x_i -> x_i^p, dx_i -> p x_i^{p-1} dx_i and
    ///   g^[k] -> sum_{i+j=k} ((ip)!/i!) g^[ip] (p^j/j!) v^j,
    /// v = (g(x^p) - g^p)/p computed exactly over Z.  Terms landing above the
    /// level cap are exact zeros.
    EnvTerms frobenius(const EnvTerms& T) const {
        const int p = static_cast<int>(R_.p());
        EnvTerms raw;
        for (const auto& [key, c] : T) {
            EnvKey base{{key.e[0] * p, key.e[1] * p}, 0, key.odd};
            std::uint64_t coef = c;
            for (int i = 0; i < chart_.nvars(); ++i)
                if (key.odd >> i & 1u) {
                    base.e[i] += p - 1;
                    coef = R_.mul(coef, R_.p() % R_.modulus());
                }
            if (coef == 0) continue;
            if (!chart_.has_relation || key.k == 0) {
                add(raw, base, coef);
                continue;
            }
            const int cap = max_level(key.degree());
            for (int i = 0; i <= key.k; ++i) {
                const int j = key.k - i;
                if (i * p > cap) break;
                const std::uint64_t a = R_.mul(factorial_ratio(static_cast<std::uint64_t>(i * p), i, R_).value(),
                                               divided_power_of_p(static_cast<std::uint64_t>(j), R_).value());
                if (a == 0) continue;
                EnvTerms vj = v_power(j);
                for (const auto& [vk, vc] : vj) {
                    EnvKey k{{base.e[0] + vk.e[0], base.e[1] + vk.e[1]}, i * p, base.odd};
                    add(raw, k, R_.mul(R_.mul(coef, a), vc));
                }
            }
        }
        return normalize(std::move(raw));
    }

    /// gamma_n on degree-0 elements of the DP ideal (p) + (g^[k], k >= 1):
    ///   gamma_i(c x^e) = (c/p)^i x^{ie} p^i/i!  (p | c),
    ///   gamma_i(c x^e g^[k]) = c^i x^{ie} prod_{m<=i} C(mk-1, k-1) g^[ik],
    /// combined over the terms by gamma_n(a+b) = sum gamma_i(a) gamma_{n-i}(b).
    EnvTerms gamma(int n, const EnvTerms& a) const {
        if (n < 0) throw std::invalid_argument("Envelope::gamma: negative index");
        const EnvTerms one{{EnvKey{}, 1 % R_.modulus()}};
        std::vector<EnvTerms> acc(n + 1);
        acc[0] = one;
        for (const auto& [key, c] : a) {
            if (key.odd) throw NotInIdealError("Envelope::gamma: forms of positive degree");
            if (key.k == 0 && R_.valuation(c) < 1) throw NotInIdealError("Envelope::gamma: element not in the DP ideal");
            std::vector<EnvTerms> series(n + 1);
            series[0] = one;
            std::uint64_t comb = 1 % R_.modulus();
            for (int i = 1; i <= n; ++i) {
                EnvKey k{{key.e[0] * i, key.e[1] * i}, key.k * i, 0};
                if (chart_.has_relation && k.k > max_level(0)) break;
                std::uint64_t coef;
                if (key.k == 0) {
                    coef = R_.mul(R_.pow(R_.div_p_pow(c, 1), static_cast<std::uint64_t>(i)),
                                  divided_power_of_p(static_cast<std::uint64_t>(i), R_).value());
                } else {
                    comb = R_.mul(comb, binomial(i * key.k - 1, key.k - 1, R_).value());
                    coef = R_.mul(R_.pow(c, static_cast<std::uint64_t>(i)), comb);
                }
                if (coef) series[i].emplace(k, coef);
            }
            std::vector<EnvTerms> next(n + 1);
            for (int u = 0; u <= n; ++u)
                for (int v = 0; u + v <= n; ++v) {
                    if (acc[u].empty() || series[v].empty()) continue;
                    for (const auto& [k, x] : mul(acc[u], series[v])) add(next[u + v], k, x);
                }
            acc = std::move(next);
        }
        return normalize(acc[n]);
    }

    /// Frobenius image of g^[k] before normal-form rewriting, as
    /// (exponent, level) -> coefficient.
    EnvTerms frobenius_of_dp_power_raw(int k) const {
        if (!chart_.has_relation) throw std::logic_error("frobenius_of_dp_power_raw: chart without relation");
        const int p = static_cast<int>(R_.p());
        EnvTerms raw;
        for (int i = 0; i <= k; ++i) {
            const int j = k - i;
            const std::uint64_t a = R_.mul(factorial_ratio(static_cast<std::uint64_t>(i * p), i, R_).value(),
                                           divided_power_of_p(static_cast<std::uint64_t>(j), R_).value());
            if (a == 0) continue;
            for (const auto& [vk, vc] : v_power(j)) add(raw, EnvKey{vk.e, i * p, 0}, R_.mul(a, vc));
        }
        return raw;
    }

    /// v reduced mod p^N (level-0 terms).
    const EnvTerms& v() const { return v_; }

    std::string to_string(const EnvTerms& T) const {
        if (T.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [k, c] : T) {
            if (!first) os << " + ";
            first = false;
            os << c;
            for (int i = 0; i < chart_.nvars(); ++i)
                if (k.e[i]) os << "*" << chart_.vars[i] << "^" << k.e[i];
            if (k.k) os << "*g^[" << k.k << "]";
            for (int i = 0; i < chart_.nvars(); ++i)
                if (k.odd >> i & 1u) os << "*d" << chart_.vars[i];
        }
        return os.str();
    }

private:
    EnvTerms to_terms(const IntPoly& P) const {
        EnvTerms T;
        const __int128 m = static_cast<__int128>(R_.modulus());
        for (const auto& [e, c] : P) {
            __int128 r = c % m;
            if (r < 0) r += m;
            add(T, EnvKey{e, 0, 0}, static_cast<std::uint64_t>(r));
        }
        return T;
    }
    EnvTerms v_power(int j) const {
        while (static_cast<int>(v_pows_.size()) <= j) {
            if (v_pows_.empty()) {
                v_pows_.push_back(EnvTerms{{EnvKey{}, 1 % R_.modulus()}});
            } else {
                EnvTerms r;
                for (const auto& [a, ca] : v_pows_.back())
                    for (const auto& [b, cb] : v_)
                        add(r, EnvKey{{a.e[0] + b.e[0], a.e[1] + b.e[1]}, 0, 0}, R_.mul(ca, cb));
                v_pows_.push_back(std::move(r));
            }
        }
        return v_pows_[j];
    }

    EnvChart chart_;
    ZpN R_;
    int s_;
    EnvTerms v_, rest_;
    std::vector<EnvTerms> dg_;
    std::uint64_t red_inv_ = 1;
    bool v_exact_ = false;
    mutable std::vector<EnvTerms> v_pows_;
};

/// Ring map from one chart's envelope into another's: variables go to
/// Laurent monomials, differentials to 1-forms, and g_src = scale * g_tgt so
/// that g_src^[k] -> scale^k g_tgt^[k].
struct Transition {
    std::array<Exp2, 2> var_image{};
    std::array<EnvTerms, 2> dvar_image{};  // 1-forms at level 0 on the target
    Exp2 g_scale{0, 0};

    EnvTerms apply(const Envelope& src, const Envelope& tgt, const EnvTerms& T) const {
        EnvTerms out;
        for (const auto& [key, c] : T) {
            EnvKey mono{{0, 0}, key.k, 0};
            for (int i = 0; i < src.chart().nvars(); ++i) {
                mono.e[0] += var_image[i][0] * key.e[i];
                mono.e[1] += var_image[i][1] * key.e[i];
            }
            mono.e[0] += g_scale[0] * key.k;
            mono.e[1] += g_scale[1] * key.k;
            EnvTerms t{{mono, c}};
            for (int i = 0; i < src.chart().nvars(); ++i)
                if (key.odd >> i & 1u) t = tgt.mul(t, dvar_image[i]);
            for (const auto& [k, v] : t) Envelope::add(out, k, v, tgt.ring());
        }
        return tgt.normalize(std::move(out));
    }
};

}  // namespace dpcrys
