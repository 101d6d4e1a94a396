#pragma once

// Seeded random elements and morphisms of Grassmann rings for property
// checks.  Even images have bounded degree; odd images are random odd
// combinations.

#include <cstdint>
#include <random>
#include <vector>

#include "superalgebra.hpp"

namespace dpcrys {

struct SampleShape {
    int max_even_degree = 2;  // in the even variables of B
    int max_terms = 4;
    int max_odd_degree = 4;   // number of odd generators in a monomial
};

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}

    std::mt19937_64& engine() { return rng_; }

    std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {
        return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng_);
    }

    Residue residue(const ZpN& R) { return Residue::from_canonical(R, uniform(0, R.modulus() - 1)); }

    Exponents even_monomial(const BaseRing& B, int max_deg) {
        Exponents e(B.nvars(), 0);
        int budget = static_cast<int>(uniform(0, static_cast<std::uint64_t>(max_deg)));
        for (std::size_t i = 0; i < e.size() && budget > 0; ++i) {
            const int take = static_cast<int>(uniform(0, static_cast<std::uint64_t>(budget)));
            e[i] = take;
            budget -= take;
        }
        return e;
    }

    std::uint32_t odd_mask(int m, int max_deg, int parity /* 0 even, 1 odd, -1 any */) {
        for (int guard = 0; guard < 1000; ++guard) {
            std::uint32_t mask = 0;
            for (int j = 0; j < m; ++j)
                if (uniform(0, 1)) mask |= std::uint32_t{1} << j;
            const int deg = std::popcount(mask);
            if (deg > max_deg) continue;
            if (parity >= 0 && (deg & 1) != parity) continue;
            return mask;
        }
        return parity == 1 && m > 0 ? 1u : 0u;
    }

    SuperPoly even_element(const BaseRingPtr& B, int m, const SampleShape& s) { return element(B, m, s, 0); }
    SuperPoly odd_element(const BaseRingPtr& B, int m, const SampleShape& s) {
        if (m == 0) return SuperPoly(B, m);
        return element(B, m, s, 1);
    }

    /// Random even element of the canonical DP ideal: xi-free part scaled by p.
    SuperPoly ideal_element(const BaseRingPtr& B, int m, const SampleShape& s) {
        SuperPoly a = even_element(B, m, s);
        SuperPoly r(B, m);
        const ZpN& R = B->coeffs();
        for (const auto& [k, c] : a.terms()) r.add_term(k, k.odd == 0 ? R.mul(c, R.p() % R.modulus()) : c);
        if (a.truncated()) r.mark_truncated();
        return r;
    }

    /// Random morphism Lambda_B -> Lambda_C (B free, same coefficients).
    LambdaMorphism morphism(const BaseRingPtr& B, int m, const BaseRingPtr& C, int mc, const SampleShape& s) {
        std::vector<SuperPoly> ev, od;
        for (std::size_t i = 0; i < B->nvars(); ++i) ev.push_back(even_element(C, mc, s));
        for (int j = 0; j < m; ++j) {
            // Odd linear combination of generators plus higher odd terms.
            SuperPoly o(C, mc);
            for (int t = 0; t < mc; ++t) o += residue(C->coeffs()) * SuperPoly::odd_gen(C, mc, t);
            if (uniform(0, 1)) o += odd_element(C, mc, s);
            od.push_back(o);
        }
        return LambdaMorphism(B, m, C, mc, std::move(ev), std::move(od));
    }

private:
    SuperPoly element(const BaseRingPtr& B, int m, const SampleShape& s, int parity) {
        SuperPoly r(B, m);
        const int n = static_cast<int>(uniform(1, static_cast<std::uint64_t>(s.max_terms)));
        for (int t = 0; t < n; ++t) {
            const std::uint32_t mask = odd_mask(m, s.max_odd_degree, parity);
            if (parity == 1 && (std::popcount(mask) & 1) == 0) continue;
            r += SuperPoly::monomial(B, m, even_monomial(*B, s.max_even_degree), mask,
                                     static_cast<std::int64_t>(residue(B->coeffs()).value()));
        }
        return r;
    }

    std::mt19937_64 rng_;
};

}  // namespace dpcrys
