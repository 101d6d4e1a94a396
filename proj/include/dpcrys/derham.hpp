#pragma once

// De Rham complexes of chart rings R and of R<t> (one DP direction t), the
// homotopy operator h with dh + hd = Id - rho pi, and the filtrations
// F_DP (on forms) and F_N (on cohomology classes).

#include <climits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "linalg.hpp"
#include "sampling.hpp"
#include "superalgebra.hpp"

namespace dpcrys {

struct DegreeError : std::domain_error {
    using std::domain_error::domain_error;
};

/// A chart ring with its module of differentials.  Forms are elements of
/// Lambda_R with one odd generator dx_i per ambient variable; the exterior
/// derivative acts by sum_i dx_i d/dx_i, followed by normal-form reduction.
struct ChartRing {
    BaseRingPtr ring;
    // dy = q dx where the derivative of the defining equation along y is a
    // unit (overlap charts); indices into the ambient variables.
    struct Elimination {
        int eliminated;
        int kept;
        SuperPoly q;  // 0-form, stored with odd count = nvars
    };
    std::optional<Elimination> elim;

    int odd() const { return static_cast<int>(ring->nvars()); }
    const ZpN& coeffs() const { return ring->coeffs(); }
};
using ChartPtr = std::shared_ptr<const ChartRing>;

/// Z/p^N[x_1..x_r] truncated at total degree cap.
inline ChartPtr polynomial_chart(const ZpN& R, std::vector<std::string> vars, int degree_cap) {
    BaseRing::Options o;
    o.degree_cap = degree_cap;
    return std::make_shared<ChartRing>(ChartRing{BaseRing::make(R, std::move(vars), o), std::nullopt});
}

/// Z/p^N[x, x^{-1}] on the window [-neg_cap, degree_cap].
inline ChartPtr laurent_chart(const ZpN& R, int degree_cap, int neg_cap) {
    BaseRing::Options o;
    o.degree_cap = degree_cap;
    o.neg_cap = neg_cap;
    o.localized = {true};
    return std::make_shared<ChartRing>(ChartRing{BaseRing::make(R, {"x"}, o), std::nullopt});
}

/// y^2 = x^3 + a x + b, normal form of y-degree <= 1.  Both dx and dy are
/// kept since neither partial of the equation is a unit on this chart.
inline ChartPtr weierstrass_chart(const ZpN& R, std::int64_t a, std::int64_t b, int degree_cap) {
    BaseRing::Options o;
    o.degree_cap = degree_cap;
    o.rules.push_back({{0, 2}, {{{3, 0}, 1}, {{1, 0}, a}, {{0, 0}, b}}});
    return std::make_shared<ChartRing>(ChartRing{BaseRing::make(R, {"x", "y"}, o), std::nullopt});
}

/// The Weierstrass chart with y inverted on a Laurent window; dy is
/// eliminated through dy = (3x^2 + a)/(2y) dx.
inline ChartPtr weierstrass_overlap_chart(const ZpN& R, std::int64_t a, std::int64_t b, int degree_cap, int neg_cap) {
    BaseRing::Options o;
    o.degree_cap = degree_cap;
    o.neg_cap = neg_cap;
    o.localized = {false, true};
    o.rules.push_back({{0, 2}, {{{3, 0}, 1}, {{1, 0}, a}, {{0, 0}, b}}});
    auto B = BaseRing::make(R, {"x", "y"}, o);
    const std::int64_t half = static_cast<std::int64_t>(R.inv(2));
    SuperPoly q = SuperPoly::monomial(B, 2, {2, -1}, 0, 3 * half) + SuperPoly::monomial(B, 2, {0, -1}, 0, a * half);
    return std::make_shared<ChartRing>(ChartRing{B, ChartRing::Elimination{1, 0, q}});
}

// ---------------------------------------------------------------------------
// Omega_R

/// Hodge degree of a homogeneous R-form; -1 for zero.
inline int form_degree(const SuperPoly& w) {
    int deg = -1;
    for (const auto& [k, c] : w.terms()) {
        const int d = std::popcount(k.odd);
        if (deg >= 0 && d != deg) throw DegreeError("form_degree: inhomogeneous form");
        deg = d;
    }
    return deg;
}

/// Minimal Hodge degree among the terms; INT_MAX for zero.
inline int min_form_degree(const SuperPoly& w) {
    int deg = INT_MAX;
    for (const auto& [k, c] : w.terms()) deg = std::min(deg, std::popcount(k.odd));
    return deg;
}

/// Reduce modulo the elimination relation, if any.
inline SuperPoly normalize_form(const ChartRing& chart, const SuperPoly& w) {
    if (!chart.elim) return w;
    const auto& E = *chart.elim;
    const std::uint32_t ybit = std::uint32_t{1} << E.eliminated;
    SuperPoly out(w.ring(), w.odd_count());
    const SuperPoly repl = E.q * SuperPoly::odd_gen(w.ring(), w.odd_count(), E.kept);
    for (const auto& [k, c] : w.terms()) {
        if (!(k.odd & ybit)) {
            out.add_term(k, c);
            continue;
        }
        // Rebuild the ordered product with dy replaced.
        SuperPoly t = SuperPoly::monomial(w.ring(), w.odd_count(), k.even, 0, static_cast<std::int64_t>(c));
        for (int j = 0; j < w.odd_count(); ++j) {
            if (!(k.odd >> j & 1u)) continue;
            t = t * (j == E.eliminated ? repl : SuperPoly::odd_gen(w.ring(), w.odd_count(), j));
        }
        out += t;
    }
    if (w.truncated()) out.mark_truncated();
    return out;
}

/// Exterior derivative on Omega_R.
inline SuperPoly d_chart(const ChartRing& chart, const SuperPoly& w) {
    const auto& B = chart.ring;
    const int m = chart.odd();
    if (!w.ring()->same_as(*B) || w.odd_count() != m) throw RingMismatchError("d: form not on this chart");
    SuperPoly r(B, m);
    for (const auto& [k, c] : w.terms()) {
        for (std::size_t i = 0; i < k.even.size(); ++i) {
            if (k.even[i] == 0) continue;
            if (k.odd >> i & 1u) continue;  // dx_i dx_i = 0
            Exponents e = k.even;
            e[i] -= 1;
            const std::int64_t coef = static_cast<std::int64_t>(chart.coeffs().mul(c, chart.coeffs().reduce(k.even[i])));
            r += SuperPoly::odd_gen(B, m, static_cast<int>(i)) * SuperPoly::monomial(B, m, e, k.odd, coef);
        }
    }
    if (w.truncated()) r.mark_truncated();
    return normalize_form(chart, r);
}

// ---------------------------------------------------------------------------
// Forms on R<t>:  w = sum_i alpha_i t^[i] + sum_i beta_i t^[i] dt,
// alpha_i in Omega^s_R (i <= D), beta_i in Omega^{s-1}_R (i <= D-1).

class Form {
public:
    Form() = default;
    Form(ChartPtr chart, int s, int D) : chart_(std::move(chart)), s_(s), D_(D) {
        if (s < 0) throw DegreeError("Form: negative degree");
        if (D < 0) throw std::invalid_argument("Form: negative DP truncation");
        alpha_.assign(D + 1, SuperPoly(chart_->ring, chart_->odd()));
        beta_.assign(D, SuperPoly(chart_->ring, chart_->odd()));
    }

    const ChartPtr& chart() const { return chart_; }
    int degree() const { return s_; }
    int dp_truncation() const { return D_; }
    const SuperPoly& alpha(int i) const { return alpha_.at(i); }
    const SuperPoly& beta(int i) const { return beta_.at(i); }

    void set_alpha(int i, const SuperPoly& a) {
        check_degree(a, s_);
        alpha_.at(i) = normalize_form(*chart_, a);
    }
    void set_beta(int i, const SuperPoly& b) {
        if (s_ == 0 && !b.is_zero()) throw DegreeError("Form: degree-0 forms have no dt part");
        check_degree(b, s_ - 1);
        beta_.at(i) = normalize_form(*chart_, b);
    }

    bool is_zero() const {
        for (const auto& a : alpha_)
            if (!a.is_zero()) return false;
        for (const auto& b : beta_)
            if (!b.is_zero()) return false;
        return true;
    }
    bool truncated() const {
        for (const auto& a : alpha_)
            if (a.truncated()) return true;
        for (const auto& b : beta_)
            if (b.truncated()) return true;
        return false;
    }

    friend Form operator+(const Form& a, const Form& b) {
        check_same(a, b);
        Form r = a;
        for (int i = 0; i <= a.D_; ++i) r.alpha_[i] += b.alpha_[i];
        for (int i = 0; i < a.D_; ++i) r.beta_[i] += b.beta_[i];
        return r;
    }
    Form operator-() const {
        Form r = *this;
        for (auto& x : r.alpha_) x = -x;
        for (auto& x : r.beta_) x = -x;
        return r;
    }
    friend Form operator-(const Form& a, const Form& b) { return a + (-b); }
    friend bool operator==(const Form& a, const Form& b) {
        return a.chart_ == b.chart_ && a.s_ == b.s_ && a.D_ == b.D_ && a.alpha_ == b.alpha_ && a.beta_ == b.beta_;
    }

    static void check_same(const Form& a, const Form& b) {
        if (a.chart_ != b.chart_ || a.s_ != b.s_ || a.D_ != b.D_) throw RingMismatchError("Form: operands of different shape");
    }

private:
    void check_degree(const SuperPoly& w, int expected) const {
        if (!w.ring()->same_as(*chart_->ring) || w.odd_count() != chart_->odd()) throw RingMismatchError("Form: component not on this chart");
        const int d = form_degree(w);
        if (d >= 0 && d != expected) throw DegreeError("Form: component of the wrong degree");
    }

    ChartPtr chart_;
    int s_ = 0, D_ = 0;
    std::vector<SuperPoly> alpha_, beta_;
};

inline Form d(const Form& w) {
    const int s = w.degree(), D = w.dp_truncation();
    const auto& C = *w.chart();
    Form r(w.chart(), s + 1, D);
    for (int i = 0; i <= D; ++i) r.set_alpha(i, d_chart(C, w.alpha(i)));
    for (int i = 0; i < D; ++i) {
        SuperPoly b = s > 0 ? d_chart(C, w.beta(i)) : SuperPoly(C.ring, C.odd());
        const SuperPoly& a = w.alpha(i + 1);
        b += (s % 2 == 0) ? a : -a;
        r.set_beta(i, b);
    }
    return r;
}

/// h(w) = (-1)^{s-1} sum_i beta_i t^[i+1].
inline Form homotopy_h(const Form& w) {
    const int s = w.degree(), D = w.dp_truncation();
    if (s < 1) throw DegreeError("homotopy_h: degree-0 form");
    Form r(w.chart(), s - 1, D);
    for (int i = 0; i < D; ++i) r.set_alpha(i + 1, ((s - 1) % 2 == 0) ? w.beta(i) : -w.beta(i));
    return r;
}

/// Sets t = 0 and dt = 0; the result is a form with no DP direction.
inline Form project_pi(const Form& w) {
    Form r(w.chart(), w.degree(), 0);
    r.set_alpha(0, w.alpha(0));
    return r;
}

/// Inclusion of Omega_R as the t-free part, truncated at D.
inline Form include_rho(const Form& w, int D) {
    Form r(w.chart(), w.degree(), D);
    r.set_alpha(0, w.alpha(0));
    return r;
}

/// The largest s with w in F_DP^s: alpha_i must lie in Omega^{>= s-i}, beta_i
/// in Omega^{>= s-1-i}.  Zero lies in every step (INT_MAX).
inline int filtration_degree_FDP(const Form& w) {
    int best = INT_MAX;
    for (int i = 0; i <= w.dp_truncation(); ++i) {
        const int m = min_form_degree(w.alpha(i));
        if (m != INT_MAX) best = std::min(best, m + i);
    }
    for (int i = 0; i < w.dp_truncation(); ++i) {
        const int m = min_form_degree(w.beta(i));
        if (m != INT_MAX) best = std::min(best, m + 1 + i);
    }
    return best;
}

/// Random homogeneous form of degree s.
inline Form random_form(Sampler& S, const ChartPtr& chart, int s, int D, const SampleShape& shape) {
    Form w(chart, s, D);
    const int m = chart->odd();
    auto component = [&](int deg) {
        SuperPoly c(chart->ring, m);
        if (deg < 0 || deg > m) return c;
        const int terms = static_cast<int>(S.uniform(0, static_cast<std::uint64_t>(shape.max_terms)));
        for (int t = 0; t < terms; ++t) {
            std::uint32_t mask = 0;
            // Random subset of size deg.
            std::vector<int> idx(m);
            for (int j = 0; j < m; ++j) idx[j] = j;
            std::shuffle(idx.begin(), idx.end(), S.engine());
            for (int j = 0; j < deg; ++j) mask |= std::uint32_t{1} << idx[j];
            Exponents e = S.even_monomial(*chart->ring, shape.max_even_degree);
            for (std::size_t v = 0; v < e.size(); ++v)
                if (chart->ring->localized(v) && S.uniform(0, 1)) e[v] = -e[v];
            c += SuperPoly::monomial(chart->ring, m, e, mask, static_cast<std::int64_t>(S.residue(chart->coeffs()).value()));
        }
        return c;
    };
    for (int i = 0; i <= D; ++i) w.set_alpha(i, component(s));
    if (s > 0)
        for (int i = 0; i < D; ++i) w.set_beta(i, component(s - 1));
    return w;
}

// ---------------------------------------------------------------------------
// F_N on cohomology:  F_N^n H = sum_{s+t >= n} p^{[s]} F_H^t H.

/// H = (+) Z/p^{e_i} in class coordinates, with generators of F_H^t given as
/// columns (t = 0, 1, ...; F_H^t = 0 beyond the listed steps).
struct FiltrationLattice {
    ZpN ring;
    std::vector<int> exponents;
    std::vector<ZpNMatrix> hodge_steps;
};

/// Coefficients c with class = sum_t p^{[max(n-t,0)]} F_H^t-generators . c
/// (relations p^{e_i} appended); nullopt when the class is not in F_N^n.
inline std::optional<std::vector<std::uint64_t>> filtration_FN_level(const FiltrationLattice& L,
                                                                     const std::vector<std::uint64_t>& cls, int n) {
    const ZpN& R = L.ring;
    const std::size_t h = L.exponents.size();
    if (cls.size() != h) throw std::invalid_argument("filtration_FN_level: class has the wrong size");
    std::size_t ncols = h;
    for (const auto& g : L.hodge_steps) ncols += g.cols();
    ZpNMatrix M(h, ncols, R);
    std::size_t col = 0;
    for (std::size_t t = 0; t < L.hodge_steps.size(); ++t) {
        const int s = std::max(n - static_cast<int>(t), 0);
        const std::uint64_t scale = R.p_pow(static_cast<int>(bracket(static_cast<std::uint64_t>(s), R.p())));
        const auto& G = L.hodge_steps[t];
        if (G.rows() != h) throw std::invalid_argument("filtration_FN_level: generator size mismatch");
        for (std::size_t j = 0; j < G.cols(); ++j, ++col)
            for (std::size_t i = 0; i < h; ++i) M(i, col) = R.mul(G(i, j), scale);
    }
    for (std::size_t i = 0; i < h; ++i, ++col) M(i, col) = R.p_pow(L.exponents[i]);
    return solve(M, cls);
}

// ---------------------------------------------------------------------------
// Randomized check of w - rho pi w = dh w + hd w and d^2 = 0.

inline std::vector<ChartPtr> homotopy_test_charts(const ZpN& R) {
    return {polynomial_chart(R, {"x"}, 30), polynomial_chart(R, {"x", "y"}, 30), laurent_chart(R, 30, 30),
            weierstrass_chart(R, 1, 1, 30), weierstrass_overlap_chart(R, 1, 1, 30, 30)};
}

struct HomotopyReport {
    int trials = 0;
    int identity_failures = 0;
    int square_failures = 0;
    std::string witness;
    bool pass() const { return identity_failures == 0 && square_failures == 0; }
};

/// Trials cycle through the standard charts with random homogeneous forms of
/// random degree and truncation.
inline HomotopyReport homotopy_suite(std::uint64_t p, int N, int trials, std::uint64_t seed) {
    HomotopyReport rep;
    const ZpN R(p, N);
    const auto charts = homotopy_test_charts(R);
    Sampler S(seed);
    const SampleShape shape{3, 3, 2};
    for (int t = 0; t < trials; ++t) {
        const ChartPtr& C = charts[static_cast<std::size_t>(t) % charts.size()];
        const int D = 1 + static_cast<int>(S.uniform(0, 4));
        const int s = static_cast<int>(S.uniform(0, static_cast<std::uint64_t>(C->odd() + 1)));
        const Form w = random_form(S, C, s, D, shape);
        ++rep.trials;
        if (!d(d(w)).is_zero()) {
            ++rep.square_failures;
            if (rep.witness.empty()) rep.witness = "d^2 != 0 on trial " + std::to_string(t);
        }
        const Form lhs = w - include_rho(project_pi(w), D);
        Form rhs(C, s, D);
        if (s > 0) rhs = rhs + d(homotopy_h(w));
        rhs = rhs + homotopy_h(d(w));
        if (!(lhs == rhs)) {
            ++rep.identity_failures;
            if (rep.witness.empty()) rep.witness = "homotopy identity fails on trial " + std::to_string(t);
        }
    }
    return rep;
}

}  // namespace dpcrys
