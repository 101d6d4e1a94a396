#pragma once

// Curves over Z_p mod p^N: the standard affine cover, DP envelopes of the
// charts inside their ambient planes, the Cech-de Rham total complex on
// finite weight windows, and the Frobenius action on its cohomology.

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "derham.hpp"
#include "envelope.hpp"
#include "linalg.hpp"
#include "padic.hpp"

namespace dpcrys {

struct SingularReductionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class Model { Weierstrass, ProjectiveLine, MultiplicativeLine };

inline std::string model_name(Model m) {
    switch (m) {
        case Model::Weierstrass: return "weierstrass";
        case Model::ProjectiveLine: return "projective-line";
        case Model::MultiplicativeLine: return "multiplicative-line";
    }
    return "?";
}

struct Caps {
    int d_poly = 0;  // weight bound on the first chart (and positive direction)
    int d_neg = 0;   // weight bound on the second chart (and negative direction)
    int d_dp = 0;    // DP cap
};

struct CurveSpec {
    std::uint64_t p = 5;
    int N = 2;
    Model model = Model::Weierstrass;
    std::int64_t a = 0, b = 0;
    std::optional<int> d_poly, d_neg, d_dp;

    ZpN ring() const { return ZpN(p, N); }

    /// -16(4a^3 + 27b^2), exact.
    __int128 discriminant() const {
        const __int128 A = a, B = b;
        return -16 * (4 * A * A * A + 27 * B * B);
    }

    void validate() const {
        (void)ring();
        if (model == Model::Weierstrass) {
            const __int128 P = static_cast<__int128>(p);
            if (discriminant() % P == 0) throw SingularReductionError("curve has bad reduction: p divides the discriminant");
        }
    }

    /// Unset caps default to the exactness threshold for the DP cap and, on
    /// the elliptic model, to windows that grow with it: closed lifts of
    /// curve classes carry corrections up to level D_dp, which weigh 6 (resp.
    /// 3) per level.
    Caps caps() const {
        Caps c;
        c.d_dp = d_dp ? *d_dp : (model == Model::Weierstrass ? min_dp_cap(p, N) : 0);
        switch (model) {
            case Model::Weierstrass:
                c.d_poly = 8 + 6 * c.d_dp;
                c.d_neg = 4 + 3 * c.d_dp;
                break;
            case Model::ProjectiveLine:
                c.d_poly = 2;
                c.d_neg = 2;
                break;
            case Model::MultiplicativeLine:
                // |exponent| >= p carries torsion classes x^{kp-1} dx.
                c.d_poly = static_cast<int>(p) - 1;
                c.d_neg = static_cast<int>(p) - 1;
                break;
        }
        if (d_poly) c.d_poly = *d_poly;
        if (d_neg) c.d_neg = *d_neg;
        return c;
    }
};

// ---------------------------------------------------------------------------
// Covers

/// sum var_i e_i + level k + sum dvar_i [dx_i] <= bounds[bound_index]
struct WeightRule {
    std::array<int, 2> var{0, 0};
    int level = 0;
    std::array<int, 2> dvar{0, 0};
    int bound_index = 0;

    int weight(const EnvKey& k) const {
        int w = var[0] * k.e[0] + var[1] * k.e[1] + level * k.k;
        for (int i = 0; i < 2; ++i)
            if (k.odd >> i & 1u) w += dvar[i];
        return w;
    }
};

struct Cover {
    std::vector<EnvChart> charts;          // one or two charts
    std::optional<EnvChart> overlap;       // present iff two charts
    std::vector<Transition> restriction;   // chart i -> overlap
    std::vector<std::vector<WeightRule>> windows;  // charts..., then overlap
    bool has_relation() const { return charts.front().has_relation; }
    int ambient_dim() const { return charts.front().nvars(); }
};

namespace detail {

inline IntPoly intpoly_of(std::initializer_list<std::pair<Exp2, std::int64_t>> terms) {
    IntPoly P;
    for (const auto& [e, c] : terms) intpoly::add_term(P, e, c);
    return P;
}

}  // namespace detail

/// Weierstrass: U0 = {Z != 0} with (x, y) and g0 = y^2 - x^3 - a x - b;
/// U1 = {Y != 0} with (u, w) = (X/Y, Z/Y) and g1 = w - u^3 - a u w^2 - b w^3;
/// overlap = U0 with y inverted, u = x/y, w = 1/y, g1 = y^{-3} g0.
inline Cover build_cover(const CurveSpec& spec) {
    spec.validate();
    Cover C;
    using detail::intpoly_of;
    switch (spec.model) {
        case Model::Weierstrass: {
            const std::int64_t a = spec.a, b = spec.b;
            IntPoly g0 = intpoly_of({{{0, 2}, 1}, {{3, 0}, -1}, {{1, 0}, -a}, {{0, 0}, -b}});
            IntPoly g1 = intpoly_of({{{0, 1}, 1}, {{3, 0}, -1}, {{1, 2}, -a}, {{0, 3}, -b}});
            C.charts.push_back(EnvChart::with_relation("U0", {"x", "y"}, {false, false}, g0, 0, 3));
            C.charts.push_back(EnvChart::with_relation("U1", {"u", "w"}, {false, false}, g1, 0, 3));
            C.overlap = EnvChart::with_relation("U01", {"x", "y"}, {false, true}, g0, 0, 3);
            Transition t0;
            t0.var_image = {Exp2{1, 0}, Exp2{0, 1}};
            t0.dvar_image = {EnvTerms{{EnvKey{{0, 0}, 0, 1u}, 1}}, EnvTerms{{EnvKey{{0, 0}, 0, 2u}, 1}}};
            const ZpN R = spec.ring();
            Transition t1;
            t1.var_image = {Exp2{1, -1}, Exp2{0, -1}};
            // du = y^{-1} dx - x y^{-2} dy,  dw = -y^{-2} dy
            t1.dvar_image = {EnvTerms{{EnvKey{{0, -1}, 0, 1u}, 1}, {EnvKey{{1, -2}, 0, 2u}, R.neg(1)}},
                             EnvTerms{{EnvKey{{0, -2}, 0, 2u}, R.neg(1)}}};
            t1.g_scale = {0, -3};
            C.restriction = {t0, t1};
            const WeightRule w0{{2, 3}, 6, {2, 3}, 0};
            const WeightRule w1{{1, 1}, 3, {1, 1}, 1};
            const WeightRule w1_on_overlap{{0, -1}, 0, {0, -1}, 1};
            C.windows = {{w0}, {w1}, {w0, w1_on_overlap}};
            break;
        }
        case Model::ProjectiveLine: {
            C.charts.push_back(EnvChart::free_chart("U0", {"x"}, {false, false}));
            C.charts.push_back(EnvChart::free_chart("U1", {"t"}, {false, false}));
            C.overlap = EnvChart::free_chart("U01", {"x"}, {true, false});
            const ZpN R = spec.ring();
            Transition t0;
            t0.var_image = {Exp2{1, 0}, Exp2{0, 0}};
            t0.dvar_image = {EnvTerms{{EnvKey{{0, 0}, 0, 1u}, 1}}, EnvTerms{}};
            Transition t1;
            t1.var_image = {Exp2{-1, 0}, Exp2{0, 0}};
            t1.dvar_image = {EnvTerms{{EnvKey{{-2, 0}, 0, 1u}, R.neg(1)}}, EnvTerms{}};
            C.restriction = {t0, t1};
            const WeightRule pos{{1, 0}, 0, {1, 0}, 0};
            const WeightRule pos1{{1, 0}, 0, {1, 0}, 1};
            const WeightRule neg{{-1, 0}, 0, {-1, 0}, 1};
            C.windows = {{pos}, {pos1}, {pos, neg}};
            break;
        }
        case Model::MultiplicativeLine: {
            C.charts.push_back(EnvChart::free_chart("U0", {"x"}, {true, false}));
            const WeightRule pos{{1, 0}, 0, {1, 0}, 0};
            const WeightRule neg{{-1, 0}, 0, {-1, 0}, 1};
            C.windows = {{pos, neg}};
            break;
        }
    }
    return C;
}

// ---------------------------------------------------------------------------
// Total complex  C^n = (+)_i Omega^n(U_i) (+) Omega^{n-1}(U_01)

using Cochain = std::vector<std::uint64_t>;

class TotalComplex {
public:
    TotalComplex(const Cover& cover, const ZpN& R, int dp_cap, std::array<int, 2> bounds)
        : cover_(cover), R_(R), s_(dp_cap + 2), bounds_(bounds) {
        for (const auto& c : cover_.charts) envs_.emplace_back(c, R, s_);
        if (cover_.overlap) envs_.emplace_back(*cover_.overlap, R, s_);
        top_ = cover_.ambient_dim() + (cover_.overlap ? 1 : 0);
        bases_.resize(top_ + 1);
        index_.resize(top_ + 1);
        for (int n = 0; n <= top_; ++n) {
            for (int comp = 0; comp < ncomp(); ++comp) {
                const int j = comp_degree(n, comp);
                if (j < 0 || j > cover_.ambient_dim()) continue;
                enumerate(comp, j, [&](const EnvKey& k) {
                    index_[n].emplace(std::pair{comp, k}, bases_[n].size());
                    bases_[n].emplace_back(comp, k);
                });
            }
        }
        for (int n = 0; n < top_; ++n) D_.push_back(build_differential(n));
    }

    const ZpN& ring() const { return R_; }
    int top_degree() const { return top_; }
    int s() const { return s_; }
    int ncomp() const { return static_cast<int>(envs_.size()); }
    bool is_overlap(int comp) const { return cover_.overlap && comp == ncomp() - 1; }
    int comp_degree(int n, int comp) const { return is_overlap(comp) ? n - 1 : n; }
    const Envelope& env(int comp) const { return envs_.at(comp); }
    const Cover& cover() const { return cover_; }
    std::size_t dim(int n) const { return n < 0 || n > top_ ? 0 : bases_[n].size(); }
    const std::vector<std::pair<int, EnvKey>>& basis(int n) const { return bases_.at(n); }

    /// D^n: C^n -> C^{n+1}; zero maps at the ends.
    ZpNMatrix differential(int n) const {
        if (n >= 0 && n < top_) return D_[n];
        return ZpNMatrix(dim(n + 1), dim(n), R_);
    }

    bool in_window(int comp, const EnvKey& k) const {
        for (const auto& w : cover_.windows.at(comp))
            if (w.weight(k) > bounds_[w.bound_index]) return false;
        return true;
    }

    /// Assemble a cochain from per-component elements; terms outside the
    /// window are closure failures.
    Cochain to_vector(int n, const std::vector<EnvTerms>& parts, const char* what) const {
        Cochain v(dim(n), 0);
        for (int comp = 0; comp < ncomp(); ++comp) {
            for (const auto& [k, c] : parts.at(comp)) {
                auto it = index_[n].find({comp, k});
                if (it == index_[n].end()) {
                    std::ostringstream os;
                    os << what << ": term " << env(comp).to_string(EnvTerms{{k, c}}) << " on " << env(comp).chart().name
                       << " (degree " << n << ") lies outside the window";
                    throw ClosureError(os.str());
                }
                v[it->second] = R_.add(v[it->second], c);
            }
        }
        return v;
    }

    std::vector<EnvTerms> components(int n, const Cochain& v) const {
        std::vector<EnvTerms> parts(ncomp());
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i]) parts[bases_[n][i].first].emplace(bases_[n][i].second, v[i]);
        return parts;
    }

    /// Total differential applied to per-component elements.
    std::vector<EnvTerms> apply_D(int n, const std::vector<EnvTerms>& parts) const {
        std::vector<EnvTerms> out(ncomp());
        const int charts = static_cast<int>(cover_.charts.size());
        for (int comp = 0; comp < ncomp(); ++comp) {
            const auto& P = parts[comp];
            if (P.empty()) continue;
            if (is_overlap(comp)) {
                for (const auto& [k, c] : env(comp).d(P)) Envelope::add(out[comp], k, R_.neg(c), R_);
                continue;
            }
            for (const auto& [k, c] : env(comp).d(P)) Envelope::add(out[comp], k, c, R_);
            if (cover_.overlap) {
                const int ov = ncomp() - 1;
                const EnvTerms r = cover_.restriction[comp].apply(env(comp), env(ov), P);
                const bool minus = comp == 0 && charts == 2;
                for (const auto& [k, c] : r) Envelope::add(out[ov], k, minus ? R_.neg(c) : c, R_);
            }
        }
        (void)n;
        return out;
    }

    /// Fr applied componentwise, expressed in another complex (usually the
    /// dilated window).
    Cochain frobenius_into(const TotalComplex& dst, int n, const Cochain& z) const {
        auto parts = components(n, z);
        std::vector<EnvTerms> img(ncomp());
        for (int comp = 0; comp < ncomp(); ++comp) img[comp] = env(comp).frobenius(parts[comp]);
        return dst.to_vector(n, img, "Frobenius image");
    }

    /// The inclusion of this window into a larger one.
    Cochain embed_into(const TotalComplex& dst, int n, const Cochain& z) const { return dst.to_vector(n, components(n, z), "inclusion"); }

private:
    template <class F>
    void enumerate(int comp, int j, F&& emit) const {
        const Envelope& E = env(comp);
        const EnvChart& ch = E.chart();
        const int maxl = E.max_level(j);
        if (maxl < 0) return;
        int B = 4;
        for (int b : bounds_) B = std::max(B, std::abs(b) + 4);
        std::array<int, 2> lo{0, 0}, hi{0, 0};
        for (int i = 0; i < ch.nvars(); ++i) {
            lo[i] = ch.localized[i] ? -B : 0;
            hi[i] = B;
            if (ch.has_relation && i == ch.red_var) hi[i] = ch.red_deg - 1;
        }
        const int r = ch.nvars();
        for (std::uint32_t mask = 0; mask < (1u << r); ++mask) {
            if (std::popcount(mask) != j) continue;
            for (int k = 0; k <= maxl; ++k)
                for (int e0 = lo[0]; e0 <= hi[0]; ++e0)
                    for (int e1 = lo[1]; e1 <= hi[1]; ++e1) {
                        EnvKey key{{e0, e1}, k, mask};
                        if (in_window(comp, key)) emit(key);
                    }
        }
    }

    ZpNMatrix build_differential(int n) const {
        ZpNMatrix M(dim(n + 1), dim(n), R_);
        for (std::size_t col = 0; col < bases_[n].size(); ++col) {
            const auto& [comp, key] = bases_[n][col];
            std::vector<EnvTerms> parts(ncomp());
            parts[comp].emplace(key, 1 % R_.modulus());
            const Cochain img = to_vector(n + 1, apply_D(n, parts), "differential");
            for (std::size_t r = 0; r < img.size(); ++r) M(r, col) = img[r];
        }
        return M;
    }

    const Cover& cover_;
    ZpN R_;
    int s_;
    std::array<int, 2> bounds_;
    std::vector<Envelope> envs_;
    int top_ = 0;
    std::vector<std::vector<std::pair<int, EnvKey>>> bases_;
    std::vector<std::map<std::pair<int, EnvKey>, std::size_t>> index_;
    std::vector<ZpNMatrix> D_;
};

inline MiddleCohomology cohomology(const TotalComplex& T, int n) { return middle_cohomology(T.differential(n - 1), T.differential(n)); }

// ---------------------------------------------------------------------------
// Frobenius on cohomology

/// Image of H^n(small window) in H^n(dilated window): small cocycles modulo
/// those that bound on the dilated window.  Edge effects of a single window
/// (spurious classes at the boundary weight) disappear in the image.
class WindowCohomology {
public:
    const std::vector<int>& exponents() const { return quotient_->exponents(); }
    std::size_t size() const { return exponents().size(); }
    bool is_free() const {
        const int N = cocycles_.ring().precision();
        return std::all_of(exponents().begin(), exponents().end(), [N](int e) { return e >= N; });
    }
    /// Representative cocycles, columns on the small window.
    const ZpNMatrix& representatives() const { return reps_; }

    /// Class coordinates of a small-window cocycle.
    std::vector<std::uint64_t> coordinates(const Cochain& z) const {
        auto c = solve(cocycles_, z);
        if (!c) throw std::domain_error("coordinates: not a cocycle on the window");
        return quotient_->coordinates(*c);
    }

    friend class FrobeniusPipeline;

private:
    ZpNMatrix cocycles_;  // small-window cocycle basis (columns)
    std::optional<MiddleCohomology> quotient_;
    ZpNMatrix reps_;
};

/// Small window (bounds from the caps) for cocycles, and its p-fold dilation,
/// which contains their Frobenius images and the bounding cochains.
class FrobeniusPipeline {
public:
    explicit FrobeniusPipeline(const CurveSpec& spec) : FrobeniusPipeline(spec, spec.caps()) {}

    /// threshold = false skips the DP-cap exactness check (used to compare
    /// truncations).
    FrobeniusPipeline(const CurveSpec& spec, Caps caps, bool threshold = true)
        : spec_(spec), caps_(caps), R_(spec.ring()), cover_(build_cover(spec)) {
        if (threshold && cover_.has_relation()) {
            const int need = min_dp_cap(spec.p, spec.N);
            if (caps_.d_dp < need) {
                std::ostringstream os;
                os << "DP cap " << caps_.d_dp << " is below the exactness threshold " << need << " for p=" << spec.p
                   << ", N=" << spec.N;
                throw CapExceededError(os.str());
            }
        }
        if (caps_.d_dp < 0) throw CapExceededError("negative DP cap");
        const int p = static_cast<int>(spec.p);
        small_.emplace(cover_, R_, caps_.d_dp, std::array<int, 2>{caps_.d_poly, caps_.d_neg});
        big_.emplace(cover_, R_, caps_.d_dp, std::array<int, 2>{p * caps_.d_poly, p * caps_.d_neg});
    }

    const CurveSpec& spec() const { return spec_; }
    const Caps& caps() const { return caps_; }
    const ZpN& ring() const { return R_; }
    const TotalComplex& small() const { return *small_; }
    const TotalComplex& big() const { return *big_; }
    int top_degree() const { return small_->top_degree(); }

    const WindowCohomology& cohomology(int n) const {
        auto it = H_.find(n);
        if (it != H_.end()) return it->second;
        WindowCohomology H;
        H.cocycles_ = kernel(small_->differential(n));
        const std::size_t z = H.cocycles_.cols();
        const ZpNMatrix M = embed(n, H.cocycles_).hcat(big_->differential(n - 1));
        const ZpNMatrix K = kernel(M);
        ZpNMatrix rel(z, K.cols(), R_);
        for (std::size_t i = 0; i < z; ++i)
            for (std::size_t j = 0; j < K.cols(); ++j) rel(i, j) = K(i, j);
        H.quotient_.emplace(middle_cohomology(rel, ZpNMatrix(0, z, R_)));
        H.reps_ = H.cocycles_ * H.quotient_->representatives();
        return H_.emplace(n, std::move(H)).first->second;
    }

    /// Columns of a small-window matrix, re-indexed on the dilated window.
    ZpNMatrix embed(int n, const ZpNMatrix& cols) const {
        ZpNMatrix out(big_->dim(n), cols.cols(), R_);
        for (std::size_t i = 0; i < cols.cols(); ++i) {
            const Cochain v = small_->embed_into(*big_, n, cols.column(i));
            for (std::size_t r = 0; r < v.size(); ++r) out(r, i) = v[r];
        }
        return out;
    }

    /// Matrix of Fr on H^n in the basis of computed representatives; needs a
    /// free cohomology module.
    ZpNMatrix frobenius_matrix(int n) const {
        const auto& H = cohomology(n);
        if (!H.is_free()) throw ClosureError("cohomology has torsion on the window; the Frobenius matrix is undefined");
        return frobenius_matrix_on(n, H.representatives());
    }

    /// Same, for an explicitly given basis of cocycles (columns on the small
    /// window).
    ZpNMatrix frobenius_matrix_on(int n, const ZpNMatrix& reps) const {
        const std::size_t h = reps.cols();
        const TotalComplex& S = *small_;
        const TotalComplex& B = *big_;
        ZpNMatrix img(B.dim(n), h, R_);
        for (std::size_t i = 0; i < h; ++i) {
            const Cochain fz = S.frobenius_into(B, n, reps.column(i));
            for (std::size_t r = 0; r < B.dim(n); ++r) img(r, i) = fz[r];
        }
        const ZpNMatrix M = embed(n, reps).hcat(B.differential(n - 1));
        auto X = solve_many(M, img);
        if (!X) throw ClosureError("Frobenius image of a class is not in the span of the basis classes on the dilated window");
        const ZpNMatrix K = kernel(M);
        for (std::size_t c = 0; c < K.cols(); ++c)
            for (std::size_t i = 0; i < h; ++i)
                if (K(i, c) != 0) throw ClosureError("basis classes are dependent on the dilated window");
        ZpNMatrix F(h, h, R_);
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < h; ++j) F(i, j) = (*X)(i, j);
        return F;
    }

    /// Class coordinates of the image of H^n(F^t) in H^n, as columns.  F^t
    /// keeps components of form degree j at DP level >= t - j.
    ZpNMatrix hodge_step(int n, int t) const {
        const TotalComplex& S = *small_;
        const auto& basis = S.basis(n);
        std::vector<std::size_t> cols;
        for (std::size_t i = 0; i < basis.size(); ++i) {
            const auto& [comp, key] = basis[i];
            if (key.k >= t - S.comp_degree(n, comp)) cols.push_back(i);
        }
        const ZpNMatrix D = S.differential(n);
        ZpNMatrix Dsub(D.rows(), cols.size(), R_);
        for (std::size_t c = 0; c < cols.size(); ++c)
            for (std::size_t r = 0; r < D.rows(); ++r) Dsub(r, c) = D(r, cols[c]);
        const ZpNMatrix K = kernel(Dsub);
        const auto& H = cohomology(n);
        ZpNMatrix G(H.size(), K.cols(), R_);
        for (std::size_t g = 0; g < K.cols(); ++g) {
            Cochain z(S.dim(n), 0);
            for (std::size_t c = 0; c < cols.size(); ++c) z[cols[c]] = K(c, g);
            const auto coords = H.coordinates(z);
            for (std::size_t i = 0; i < coords.size(); ++i) G(i, g) = coords[i];
        }
        if (G.cols() == 0 || G.rows() == 0) return ZpNMatrix(H.size(), 0, R_);
        ZpNMatrix Hw = howell_form(G.transpose()).H;
        std::size_t nz = 0;
        while (nz < Hw.rows() && !std::all_of(Hw.row(nz), Hw.row(nz) + Hw.cols(), [](std::uint64_t v) { return v == 0; })) ++nz;
        Hw.truncate_rows(nz);
        return Hw.transpose();
    }

    FiltrationLattice filtration_lattice(int n) const {
        FiltrationLattice L{R_, cohomology(n).exponents(), {}};
        for (int t = 0; t <= n + 1; ++t) L.hodge_steps.push_back(hodge_step(n, t));
        return L;
    }

private:
    CurveSpec spec_;
    Caps caps_;
    ZpN R_;
    Cover cover_;
    std::optional<TotalComplex> small_, big_;
    mutable std::map<int, WindowCohomology> H_;
};

inline ZpNMatrix frobenius_matrix(const CurveSpec& spec, int degree) {
    if (degree < 0 || degree > 2) throw std::invalid_argument("frobenius_matrix: degree must be 0, 1 or 2");
    return FrobeniusPipeline(spec).frobenius_matrix(degree);
}

/// Divisor lists in every degree with the given DP cap.
inline std::vector<std::vector<int>> cohomology_lists(const CurveSpec& spec, int dp_cap) {
    Caps caps = spec.caps();
    caps.d_dp = dp_cap;
    const FrobeniusPipeline P(spec, caps, false);
    std::vector<std::vector<int>> out;
    for (int n = 0; n <= P.top_degree(); ++n) out.push_back(P.cohomology(n).exponents());
    return out;
}

// ---------------------------------------------------------------------------
// Oracles and checks

/// a_p = p + 1 - #E(F_p) by enumeration with Euler's criterion.
inline std::int64_t ap_oracle(const CurveSpec& spec) {
    if (spec.model != Model::Weierstrass) throw std::invalid_argument("ap_oracle: Weierstrass model required");
    spec.validate();
    const std::int64_t p = static_cast<std::int64_t>(spec.p);
    auto mod = [p](std::int64_t v) { return ((v % p) + p) % p; };
    std::int64_t count = 1;  // point at infinity
    for (std::int64_t x = 0; x < p; ++x) {
        const std::int64_t rhs = mod(mod(x * x % p * x) + mod(spec.a) * x + mod(spec.b));
        if (rhs == 0) {
            count += 1;
            continue;
        }
        std::int64_t e = (p - 1) / 2, base = rhs, acc = 1;
        while (e) {
            if (e & 1) acc = acc * base % p;
            base = base * base % p;
            e >>= 1;
        }
        count += acc == 1 ? 2 : 0;
    }
    return p + 1 - count;
}

inline std::uint64_t trace(const ZpNMatrix& F) {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < F.rows(); ++i) t = F.ring().add(t, F(i, i));
    return t;
}

/// Determinant by cofactor expansion (matrices here are at most 2x2 or so).
inline std::uint64_t determinant(const ZpNMatrix& F) {
    const ZpN& R = F.ring();
    const std::size_t n = F.rows();
    if (n != F.cols()) throw std::invalid_argument("determinant: square matrix expected");
    if (n == 0) return 1 % R.modulus();
    if (n == 1) return F(0, 0);
    std::uint64_t det = 0;
    for (std::size_t j = 0; j < n; ++j) {
        ZpNMatrix minor(n - 1, n - 1, R);
        for (std::size_t r = 1; r < n; ++r)
            for (std::size_t c = 0, cc = 0; c < n; ++c)
                if (c != j) minor(r - 1, cc++) = F(r, c);
        const std::uint64_t term = R.mul(F(0, j), determinant(minor));
        det = (j % 2 == 0) ? R.add(det, term) : R.sub(det, term);
    }
    return det;
}

struct DivisibilityReport {
    int s = 0;
    int required = 0;
    int min_valuation = 0;  // over Fr-images of F_H^s generators; N if none
    std::size_t generators = 0;
    bool pass = true;
};

/// Fr(F_H^s H^n) subset p^s H^n, via valuations of solved coefficients.
inline DivisibilityReport divisibility_check(const FrobeniusPipeline& P, int n, int s) {
    DivisibilityReport rep;
    rep.s = s;
    rep.required = s;
    const ZpN& R = P.ring();
    rep.min_valuation = R.precision();
    if (s == 0) return rep;
    const ZpNMatrix G = P.hodge_step(n, s);
    const ZpNMatrix F = P.frobenius_matrix(n);
    const ZpNMatrix img = F * G;
    rep.generators = G.cols();
    for (std::size_t i = 0; i < img.rows(); ++i)
        for (std::size_t j = 0; j < img.cols(); ++j) rep.min_valuation = std::min(rep.min_valuation, R.valuation(img(i, j)));
    rep.pass = rep.min_valuation >= std::min(s, R.precision());
    return rep;
}

// ---------------------------------------------------------------------------
// Fixture files: "key = value" lines, '#' comments.

struct FixtureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::int64_t parse_int(const std::string& key, const std::string& v) {
    std::int64_t out = 0;
    const char* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) throw FixtureError("fixture: value of '" + key + "' is not an integer: '" + v + "'");
    return out;
}

}  // namespace detail

/// "Dpoly,Dneg,Ddp" with empty fields left unset.
inline void apply_caps(CurveSpec& spec, const std::string& caps) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : caps) {
        if (ch == ',') {
            parts.push_back(detail::trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    parts.push_back(detail::trim(cur));
    if (parts.size() != 3) throw FixtureError("caps: expected \"Dpoly,Dneg,Ddp\"");
    std::optional<int>* slots[3] = {&spec.d_poly, &spec.d_neg, &spec.d_dp};
    const char* names[3] = {"Dpoly", "Dneg", "Ddp"};
    for (int i = 0; i < 3; ++i) {
        if (parts[i].empty()) continue;
        const auto v = detail::parse_int(names[i], parts[i]);
        if (v < 0 || v > 10000) throw FixtureError(std::string("caps: ") + names[i] + " out of range");
        *slots[i] = static_cast<int>(v);
    }
}

/// Range checks shared by fixtures and command-line overrides.
inline void check_fixture(const CurveSpec& spec) {
    if (spec.p == 2 || !is_prime(spec.p)) throw FixtureError("fixture: p must be an odd prime");
    if (spec.N < 1) throw FixtureError("fixture: N must be positive");
    try {
        (void)spec.ring();
    } catch (const std::exception& e) {
        throw FixtureError(std::string("fixture: ") + e.what());
    }
    if (std::abs(spec.a) > 1000000 || std::abs(spec.b) > 1000000) throw FixtureError("fixture: |a|, |b| must be at most 10^6");
}

inline CurveSpec parse_fixture(std::istream& in) {
    CurveSpec spec;
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw FixtureError("fixture line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq)), value = detail::trim(line.substr(eq + 1));
        static const std::vector<std::string> known{"model", "p", "N", "a", "b", "Dpoly", "Dneg", "Ddp"};
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw FixtureError("fixture line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (value.empty()) throw FixtureError("fixture line " + std::to_string(lineno) + ": empty value for '" + key + "'");
        if (!kv.emplace(key, value).second) throw FixtureError("fixture: duplicate key '" + key + "'");
    }
    const std::string model = kv.count("model") ? kv.at("model") : "weierstrass";
    if (model == "weierstrass")
        spec.model = Model::Weierstrass;
    else if (model == "projective-line")
        spec.model = Model::ProjectiveLine;
    else if (model == "multiplicative-line")
        spec.model = Model::MultiplicativeLine;
    else
        throw FixtureError("fixture: unknown model '" + model + "'");
    for (const char* k : {"p", "N"})
        if (!kv.count(k)) throw FixtureError(std::string("fixture: missing key '") + k + "'");
    const auto p = detail::parse_int("p", kv.at("p"));
    const auto N = detail::parse_int("N", kv.at("N"));
    if (p < 3 || N < 1 || N > 64) throw FixtureError("fixture: p must be an odd prime and N positive");
    spec.p = static_cast<std::uint64_t>(p);
    spec.N = static_cast<int>(N);
    if (spec.model == Model::Weierstrass) {
        for (const char* k : {"a", "b"})
            if (!kv.count(k)) throw FixtureError(std::string("fixture: weierstrass model needs '") + k + "'");
        spec.a = detail::parse_int("a", kv.at("a"));
        spec.b = detail::parse_int("b", kv.at("b"));
    } else if (kv.count("a") || kv.count("b")) {
        throw FixtureError("fixture: a, b only apply to the weierstrass model");
    }
    std::optional<int>* slots[3] = {&spec.d_poly, &spec.d_neg, &spec.d_dp};
    const char* names[3] = {"Dpoly", "Dneg", "Ddp"};
    for (int i = 0; i < 3; ++i)
        if (kv.count(names[i])) {
            const auto v = detail::parse_int(names[i], kv.at(names[i]));
            if (v < 0 || v > 10000) throw FixtureError(std::string("fixture: ") + names[i] + " out of range");
            *slots[i] = static_cast<int>(v);
        }
    check_fixture(spec);
    return spec;
}

inline CurveSpec load_fixture(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FixtureError("cannot open fixture '" + path + "'");
    return parse_fixture(in);
}

}  // namespace dpcrys
