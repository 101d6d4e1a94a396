#pragma once

// Arithmetic in Z/p^N: residues, valuations and the divided-power
// coefficients p^n/n! that every other module is built on.

#include <cstdint>
#include <algorithm>
#include <compare>
#include <ostream>
#include <stdexcept>
#include <string>

namespace dpcrys {

struct ArithmeticError : std::domain_error {
    using std::domain_error::domain_error;
};

inline bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

/// The ring Z/p^N for an odd prime p.  p^N is limited to 31 bits so that
/// products of two canonical representatives fit in 64 bits.
class ZpN {
public:
    ZpN() = default;
    ZpN(std::uint64_t p, int n) : p_(p), n_(n), m_(1) {
        if (p < 3 || !is_prime(p)) throw std::invalid_argument("ZpN: p must be an odd prime");
        if (n < 1) throw std::invalid_argument("ZpN: precision must be positive");
        for (int i = 0; i < n; ++i) {
            m_ *= p;
            if (m_ >= (std::uint64_t{1} << 31)) throw std::invalid_argument("ZpN: p^N too large");
        }
    }

    std::uint64_t p() const { return p_; }
    int precision() const { return n_; }
    std::uint64_t modulus() const { return m_; }

    std::uint64_t reduce(std::int64_t x) const {
        std::int64_t r = x % static_cast<std::int64_t>(m_);
        return static_cast<std::uint64_t>(r < 0 ? r + static_cast<std::int64_t>(m_) : r);
    }
    std::uint64_t reduce_u(std::uint64_t x) const { return x % m_; }
    std::uint64_t add(std::uint64_t a, std::uint64_t b) const {
        std::uint64_t s = a + b;
        return s >= m_ ? s - m_ : s;
    }
    std::uint64_t sub(std::uint64_t a, std::uint64_t b) const { return a >= b ? a - b : a + m_ - b; }
    std::uint64_t neg(std::uint64_t a) const { return a == 0 ? 0 : m_ - a; }
    std::uint64_t mul(std::uint64_t a, std::uint64_t b) const { return (a * b) % m_; }

    std::uint64_t pow(std::uint64_t a, std::uint64_t e) const {
        std::uint64_t r = 1 % m_;
        while (e) {
            if (e & 1) r = mul(r, a);
            a = mul(a, a);
            e >>= 1;
        }
        return r;
    }

    /// p-adic valuation of a canonical representative; valuation(0) = N.
    int valuation(std::uint64_t a) const {
        if (a == 0) return n_;
        int v = 0;
        while (a % p_ == 0) {
            a /= p_;
            ++v;
        }
        return v;
    }
    bool is_unit(std::uint64_t a) const { return a % p_ != 0; }

    /// Inverse of a unit by extended Euclid.  Non-units are rejected.
    std::uint64_t inv(std::uint64_t a) const {
        if (!is_unit(a)) throw ArithmeticError("ZpN: inverse of a non-unit");
        std::int64_t t = 0, nt = 1;
        std::int64_t r = static_cast<std::int64_t>(m_), nr = static_cast<std::int64_t>(a % m_);
        while (nr != 0) {
            std::int64_t q = r / nr;
            std::int64_t tmp = t - q * nt;
            t = nt;
            nt = tmp;
            tmp = r - q * nr;
            r = nr;
            nr = tmp;
        }
        return reduce(t);
    }

    /// a / p^k for a with valuation >= k, as a residue mod p^N.  The result is
    /// only determined mod p^(N-k); the canonical lift is returned.
    std::uint64_t div_p_pow(std::uint64_t a, int k) const {
        if (valuation(a) < k) throw ArithmeticError("ZpN: division by p^k of an element with smaller valuation");
        for (int i = 0; i < k; ++i) a /= p_;
        return a;
    }

    std::uint64_t p_pow(int k) const {
        if (k >= n_) return 0;
        std::uint64_t r = 1;
        for (int i = 0; i < k; ++i) r *= p_;
        return r;
    }

    friend bool operator==(const ZpN& a, const ZpN& b) { return a.p_ == b.p_ && a.n_ == b.n_; }

private:
    std::uint64_t p_ = 3;
    int n_ = 1;
    std::uint64_t m_ = 3;
};

/// An element of Z/p^N, always held in canonical form [0, p^N).
class Residue {
public:
    Residue() = default;
    Residue(const ZpN& ring, std::int64_t value) : ring_(ring), v_(ring.reduce(value)) {}
    static Residue from_canonical(const ZpN& ring, std::uint64_t v) {
        Residue r;
        r.ring_ = ring;
        r.v_ = v % ring.modulus();
        return r;
    }

    const ZpN& ring() const { return ring_; }
    std::uint64_t value() const { return v_; }
    int valuation() const { return ring_.valuation(v_); }
    bool is_zero() const { return v_ == 0; }
    bool is_unit() const { return ring_.is_unit(v_); }
    Residue inverse() const { return from_canonical(ring_, ring_.inv(v_)); }
    Residue pow(std::uint64_t e) const { return from_canonical(ring_, ring_.pow(v_, e)); }

    Residue operator-() const { return from_canonical(ring_, ring_.neg(v_)); }
    friend Residue operator+(const Residue& a, const Residue& b) {
        check(a, b);
        return from_canonical(a.ring_, a.ring_.add(a.v_, b.v_));
    }
    friend Residue operator-(const Residue& a, const Residue& b) {
        check(a, b);
        return from_canonical(a.ring_, a.ring_.sub(a.v_, b.v_));
    }
    friend Residue operator*(const Residue& a, const Residue& b) {
        check(a, b);
        return from_canonical(a.ring_, a.ring_.mul(a.v_, b.v_));
    }
    Residue& operator+=(const Residue& o) { return *this = *this + o; }
    Residue& operator-=(const Residue& o) { return *this = *this - o; }
    Residue& operator*=(const Residue& o) { return *this = *this * o; }

    friend bool operator==(const Residue& a, const Residue& b) { return a.ring_ == b.ring_ && a.v_ == b.v_; }
    friend std::ostream& operator<<(std::ostream& os, const Residue& r) { return os << r.v_; }

private:
    static void check(const Residue& a, const Residue& b) {
        if (!(a.ring_ == b.ring_)) throw std::invalid_argument("Residue: mismatched rings");
    }
    ZpN ring_;
    std::uint64_t v_ = 0;
};

// ---------------------------------------------------------------------------
// Valuations

inline std::uint64_t digit_sum(std::uint64_t n, std::uint64_t p) {
    std::uint64_t s = 0;
    while (n) {
        s += n % p;
        n /= p;
    }
    return s;
}

/// ord_p(n!) = (n - S_p(n)) / (p - 1), S_p the base-p digit sum.
inline std::uint64_t ord_factorial(std::uint64_t n, std::uint64_t p) { return (n - digit_sum(n, p)) / (p - 1); }

/// ord_p(p^n / n!) = n - ord_p(n!).
inline std::uint64_t ord_p_pow_over_factorial(std::uint64_t n, std::uint64_t p) { return n - ord_factorial(n, p); }

/// Upper end of the scan window used by bracket(): ceil(k(p-1)/(p-2)) + p.
inline std::uint64_t bracket_scan_limit(std::uint64_t k, std::uint64_t p) {
    return (k * (p - 1) + (p - 3)) / (p - 2) + p;
}

/// [k] = min over n >= k of ord_p(p^n/n!).  The minimand grows with slope at
/// least (p-2)/(p-1), so the finite window of bracket_scan_limit suffices.
inline std::uint64_t bracket(std::uint64_t k, std::uint64_t p) {
    if (p < 3) throw std::invalid_argument("bracket: p must be odd");
    std::uint64_t best = ord_p_pow_over_factorial(k, p);
    const std::uint64_t hi = bracket_scan_limit(k, p);
    for (std::uint64_t n = k + 1; n <= hi; ++n) best = std::min(best, ord_p_pow_over_factorial(n, p));
    return best;
}

/// Smallest k with [k] >= N: beyond it, Frobenius images of DP powers vanish.
inline int min_dp_cap(std::uint64_t p, int precision) {
    std::uint64_t k = 0;
    while (bracket(k, p) < static_cast<std::uint64_t>(precision)) ++k;
    return static_cast<int>(k);
}

/// Unit part n!/p^{ord n!} mod p^N.
inline std::uint64_t factorial_unit(std::uint64_t n, const ZpN& R) {
    std::uint64_t u = 1 % R.modulus();
    for (std::uint64_t i = 2; i <= n; ++i) {
        std::uint64_t f = i;
        while (f % R.p() == 0) f /= R.p();
        u = R.mul(u, f % R.modulus());
    }
    return u;
}

/// Residue of the integer p^v * unit, shortcut when v >= N.
inline Residue from_valuation_split(const ZpN& R, std::uint64_t v, std::uint64_t unit) {
    if (v >= static_cast<std::uint64_t>(R.precision())) return Residue(R, 0);
    return Residue::from_canonical(R, R.mul(R.p_pow(static_cast<int>(v)), unit));
}

/// p^n / n! mod p^N, computed as p^(n - ord n!) times the inverse unit part.
inline Residue divided_power_of_p(std::uint64_t n, const ZpN& R) {
    const std::uint64_t v = ord_p_pow_over_factorial(n, R.p());
    if (v >= static_cast<std::uint64_t>(R.precision())) return Residue(R, 0);
    return from_valuation_split(R, v, R.inv(factorial_unit(n, R)));
}

/// Integer binomial C(n, k) mod p^N.
inline Residue binomial(std::uint64_t n, std::uint64_t k, const ZpN& R) {
    if (k > n) return Residue(R, 0);
    const std::uint64_t p = R.p();
    const std::uint64_t v = ord_factorial(n, p) - ord_factorial(k, p) - ord_factorial(n - k, p);
    if (v >= static_cast<std::uint64_t>(R.precision())) return Residue(R, 0);
    const std::uint64_t u =
        R.mul(factorial_unit(n, R), R.inv(R.mul(factorial_unit(k, R), factorial_unit(n - k, R))));
    return from_valuation_split(R, v, u);
}

/// The integer a!/b! (a >= b) mod p^N.
inline Residue factorial_ratio(std::uint64_t a, std::uint64_t b, const ZpN& R) {
    if (b > a) throw std::invalid_argument("factorial_ratio: a < b");
    std::uint64_t r = 1 % R.modulus();
    for (std::uint64_t i = b + 1; i <= a && r != 0; ++i) r = R.mul(r, i % R.modulus());
    return Residue::from_canonical(R, r);
}

}  // namespace dpcrys
