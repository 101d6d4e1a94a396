#pragma once

// Dense linear algebra over Z/p^N: Howell form, Smith form over the local
// ring, kernels, solving and cohomology in the middle of a three-term complex.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "padic.hpp"

namespace dpcrys {

struct CompositionNonzeroError : std::logic_error {
    using std::logic_error::logic_error;
};

class ZpNMatrix {
public:
    ZpNMatrix() = default;
    ZpNMatrix(std::size_t rows, std::size_t cols, const ZpN& R) : R_(R), r_(rows), c_(cols), a_(rows * cols, 0) {}

    static ZpNMatrix identity(std::size_t n, const ZpN& R) {
        ZpNMatrix m(n, n, R);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1 % R.modulus();
        return m;
    }
    static ZpNMatrix from_rows(const std::vector<std::vector<std::int64_t>>& rows, const ZpN& R) {
        const std::size_t c = rows.empty() ? 0 : rows.front().size();
        ZpNMatrix m(rows.size(), c, R);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != c) throw std::invalid_argument("ZpNMatrix: ragged rows");
            for (std::size_t j = 0; j < c; ++j) m(i, j) = R.reduce(rows[i][j]);
        }
        return m;
    }

    const ZpN& ring() const { return R_; }
    std::size_t rows() const { return r_; }
    std::size_t cols() const { return c_; }
    std::uint64_t& operator()(std::size_t i, std::size_t j) { return a_[i * c_ + j]; }
    std::uint64_t operator()(std::size_t i, std::size_t j) const { return a_[i * c_ + j]; }
    std::uint64_t* row(std::size_t i) { return a_.data() + i * c_; }
    const std::uint64_t* row(std::size_t i) const { return a_.data() + i * c_; }
    Residue at(std::size_t i, std::size_t j) const { return Residue::from_canonical(R_, (*this)(i, j)); }

    bool is_zero() const {
        return std::all_of(a_.begin(), a_.end(), [](std::uint64_t v) { return v == 0; });
    }

    ZpNMatrix transpose() const {
        ZpNMatrix t(c_, r_, R_);
        for (std::size_t i = 0; i < r_; ++i)
            for (std::size_t j = 0; j < c_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    std::vector<std::uint64_t> column(std::size_t j) const {
        std::vector<std::uint64_t> v(r_);
        for (std::size_t i = 0; i < r_; ++i) v[i] = (*this)(i, j);
        return v;
    }

    /// Append columns of another matrix with the same row count.
    ZpNMatrix hcat(const ZpNMatrix& o) const {
        if (o.r_ != r_) throw std::invalid_argument("ZpNMatrix::hcat: row mismatch");
        ZpNMatrix m(r_, c_ + o.c_, R_);
        for (std::size_t i = 0; i < r_; ++i) {
            std::copy(row(i), row(i) + c_, m.row(i));
            std::copy(o.row(i), o.row(i) + o.c_, m.row(i) + c_);
        }
        return m;
    }

    /// Reinterpret entries in Z/p^k for k <= N.
    ZpNMatrix reduce_to(const ZpN& S) const {
        if (S.p() != R_.p() || S.precision() > R_.precision()) throw std::invalid_argument("ZpNMatrix::reduce_to: no structure map");
        ZpNMatrix m(r_, c_, S);
        for (std::size_t k = 0; k < a_.size(); ++k) m.a_[k] = a_[k] % S.modulus();
        return m;
    }

    friend ZpNMatrix operator*(const ZpNMatrix& A, const ZpNMatrix& B) {
        if (A.c_ != B.r_ || !(A.R_ == B.R_)) throw std::invalid_argument("ZpNMatrix: shape mismatch in product");
        ZpNMatrix C(A.r_, B.c_, A.R_);
        const std::uint64_t m = A.R_.modulus();
        for (std::size_t i = 0; i < A.r_; ++i) {
            std::uint64_t* crow = C.row(i);
            for (std::size_t k = 0; k < A.c_; ++k) {
                const std::uint64_t a = A(i, k);
                if (a == 0) continue;
                const std::uint64_t* brow = B.row(k);
                for (std::size_t j = 0; j < B.c_; ++j) crow[j] = (crow[j] + a * brow[j]) % m;
            }
        }
        return C;
    }
    std::vector<std::uint64_t> apply(const std::vector<std::uint64_t>& x) const {
        if (x.size() != c_) throw std::invalid_argument("ZpNMatrix::apply: size mismatch");
        std::vector<std::uint64_t> y(r_, 0);
        const std::uint64_t m = R_.modulus();
        for (std::size_t i = 0; i < r_; ++i) {
            std::uint64_t s = 0;
            for (std::size_t j = 0; j < c_; ++j) s = (s + row(i)[j] * x[j]) % m;
            y[i] = s;
        }
        return y;
    }
    friend bool operator==(const ZpNMatrix& A, const ZpNMatrix& B) {
        return A.R_ == B.R_ && A.r_ == B.r_ && A.c_ == B.c_ && A.a_ == B.a_;
    }

    // Elementary operations (row i += c * row j and friends).
    void row_axpy(std::size_t i, std::size_t j, std::uint64_t c) {
        if (c == 0) return;
        const std::uint64_t m = R_.modulus();
        std::uint64_t* ri = row(i);
        const std::uint64_t* rj = row(j);
        for (std::size_t k = 0; k < c_; ++k)
            if (rj[k]) ri[k] = (ri[k] + c * rj[k]) % m;
    }
    void row_scale(std::size_t i, std::uint64_t c) {
        std::uint64_t* ri = row(i);
        for (std::size_t k = 0; k < c_; ++k) ri[k] = R_.mul(ri[k], c);
    }
    void row_swap(std::size_t i, std::size_t j) {
        if (i != j) std::swap_ranges(row(i), row(i) + c_, row(j));
    }
    void col_axpy(std::size_t i, std::size_t j, std::uint64_t c) {
        if (c == 0) return;
        for (std::size_t k = 0; k < r_; ++k)
            if ((*this)(k, j)) (*this)(k, i) = R_.add((*this)(k, i), R_.mul(c, (*this)(k, j)));
    }
    void col_scale(std::size_t i, std::uint64_t c) {
        for (std::size_t k = 0; k < r_; ++k) (*this)(k, i) = R_.mul((*this)(k, i), c);
    }
    void col_swap(std::size_t i, std::size_t j) {
        if (i == j) return;
        for (std::size_t k = 0; k < r_; ++k) std::swap((*this)(k, i), (*this)(k, j));
    }
    void append_row(const std::uint64_t* src) {
        a_.insert(a_.end(), src, src + c_);
        ++r_;
    }
    void append_zero_row() {
        a_.resize(a_.size() + c_, 0);
        ++r_;
    }
    void truncate_rows(std::size_t n) {
        r_ = n;
        a_.resize(r_ * c_);
    }

private:
    ZpN R_;
    std::size_t r_ = 0, c_ = 0;
    std::vector<std::uint64_t> a_;
};

// ---------------------------------------------------------------------------
// Howell form

struct HowellResult {
    ZpNMatrix H;          // nonzero rows only
    ZpNMatrix transform;  // transform * M == H
};

/// Row Howell normal form.  Pivots are powers of p, entries above a pivot p^v
/// lie in [0, p^v), and the span is closed under the annihilator of each pivot.
inline HowellResult howell_form(const ZpNMatrix& M) {
    const ZpN& R = M.ring();
    const int N = R.precision();
    ZpNMatrix A = M;
    ZpNMatrix T = ZpNMatrix::identity(M.rows(), R);
    std::size_t prow = 0;
    std::vector<std::pair<std::size_t, int>> pivots;  // (column, valuation) per pivot row
    for (std::size_t j = 0; j < A.cols(); ++j) {
        std::size_t best = A.rows();
        int bv = N;
        for (std::size_t i = prow; i < A.rows(); ++i) {
            const int v = R.valuation(A(i, j));
            if (v < bv) {
                bv = v;
                best = i;
            }
        }
        if (best == A.rows()) continue;
        A.row_swap(prow, best);
        T.row_swap(prow, best);
        const std::uint64_t unit = R.div_p_pow(A(prow, j), bv);
        const std::uint64_t uinv = R.inv(unit % R.modulus());
        A.row_scale(prow, uinv);
        T.row_scale(prow, uinv);
        for (std::size_t i = prow + 1; i < A.rows(); ++i) {
            if (A(i, j) == 0) continue;
            const std::uint64_t q = R.neg(R.div_p_pow(A(i, j), bv));
            A.row_axpy(i, prow, q);
            T.row_axpy(i, prow, q);
        }
        // Annihilator closure: p^(N-v) times the pivot row vanishes in column j
        // but may survive further right.
        if (bv > 0) {
            const std::uint64_t s = R.p_pow(N - bv);
            A.append_row(A.row(prow));
            T.append_row(T.row(prow));
            A.row_scale(A.rows() - 1, s);
            T.row_scale(T.rows() - 1, s);
        }
        pivots.emplace_back(j, bv);
        ++prow;
    }
    // Reduce entries above pivots.
    for (std::size_t r = 0; r < pivots.size(); ++r) {
        const auto [j, v] = pivots[r];
        const std::uint64_t pv = v == 0 ? 1 : R.p_pow(v);
        for (std::size_t i = 0; i < r; ++i) {
            const std::uint64_t e = A(i, j);
            const std::uint64_t q = e / pv;  // e - q p^v is the residue in [0, p^v)
            if (q == 0) continue;
            A.row_axpy(i, r, R.neg(q % R.modulus()));
            T.row_axpy(i, r, R.neg(q % R.modulus()));
        }
    }
    A.truncate_rows(pivots.size());
    T.truncate_rows(pivots.size());
    return {A, T};
}

// ---------------------------------------------------------------------------
// Smith form over the local ring Z/p^N

/// U * A * V = diag(p^{v_0}, ..., p^{v_{r-1}}, 0, ...), v ascending.
/// Transforms are tracked on request; V is stored transposed (Vt) so that
/// column operations become contiguous row operations.
struct SmithForm {
    std::vector<int> valuations;  // v_i for the nonzero diagonal entries
    std::optional<ZpNMatrix> U, Uinv, Vt, Vinv;
    std::size_t rows = 0, cols = 0;
    std::size_t rank() const { return valuations.size(); }
};

struct SmithOptions {
    bool track_U = false, track_Uinv = false, track_V = false, track_Vinv = false;
    ZpNMatrix* rhs = nullptr;  // receives the row operations (U * rhs)
};

inline SmithForm smith_form(ZpNMatrix A, SmithOptions opt = {}) {
    const ZpN& R = A.ring();
    const int N = R.precision();
    SmithForm out;
    out.rows = A.rows();
    out.cols = A.cols();
    if (opt.track_U) out.U = ZpNMatrix::identity(A.rows(), R);
    if (opt.track_Uinv) out.Uinv = ZpNMatrix::identity(A.rows(), R);  // stored transposed
    if (opt.track_V) out.Vt = ZpNMatrix::identity(A.cols(), R);
    if (opt.track_Vinv) out.Vinv = ZpNMatrix::identity(A.cols(), R);

    // Row op: row i += c row j.  Uinv (transposed) gets row j -= c row i.
    auto row_axpy = [&](std::size_t i, std::size_t j, std::uint64_t c) {
        A.row_axpy(i, j, c);
        if (out.U) out.U->row_axpy(i, j, c);
        if (out.Uinv) out.Uinv->row_axpy(j, i, R.neg(c));
        if (opt.rhs) opt.rhs->row_axpy(i, j, c);
    };
    auto row_swap = [&](std::size_t i, std::size_t j) {
        A.row_swap(i, j);
        if (out.U) out.U->row_swap(i, j);
        if (out.Uinv) out.Uinv->row_swap(i, j);
        if (opt.rhs) opt.rhs->row_swap(i, j);
    };
    auto row_scale = [&](std::size_t i, std::uint64_t u) {
        A.row_scale(i, u);
        if (out.U) out.U->row_scale(i, u);
        if (out.Uinv) out.Uinv->row_scale(i, R.inv(u));
        if (opt.rhs) opt.rhs->row_scale(i, u);
    };
    // Column op: col i += c col j.  Vt gets row i += c row j; Vinv gets row j -= c row i.
    auto col_axpy = [&](std::size_t i, std::size_t j, std::uint64_t c) {
        A.col_axpy(i, j, c);
        if (out.Vt) out.Vt->row_axpy(i, j, c);
        if (out.Vinv) out.Vinv->row_axpy(j, i, R.neg(c));
    };
    auto col_swap = [&](std::size_t i, std::size_t j) {
        A.col_swap(i, j);
        if (out.Vt) out.Vt->row_swap(i, j);
        if (out.Vinv) out.Vinv->row_swap(i, j);
    };

    const std::size_t n = std::min(A.rows(), A.cols());
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t bi = 0, bj = 0;
        int bv = N;
        for (std::size_t i = k; i < A.rows() && bv > 0; ++i) {
            const std::uint64_t* ri = A.row(i);
            for (std::size_t j = k; j < A.cols(); ++j) {
                if (ri[j] == 0) continue;
                const int v = R.valuation(ri[j]);
                if (v < bv) {
                    bv = v;
                    bi = i;
                    bj = j;
                    if (v == 0) break;
                }
            }
        }
        if (bv == N) break;
        row_swap(k, bi);
        col_swap(k, bj);
        const std::uint64_t unit = R.div_p_pow(A(k, k), bv);
        row_scale(k, R.inv(unit));
        // A(k,k) = p^bv now; every other entry has valuation >= bv.
        for (std::size_t i = k + 1; i < A.rows(); ++i) {
            if (A(i, k) == 0) continue;
            row_axpy(i, k, R.neg(R.div_p_pow(A(i, k), bv)));
        }
        for (std::size_t j = k + 1; j < A.cols(); ++j) {
            if (A(k, j) == 0) continue;
            col_axpy(j, k, R.neg(R.div_p_pow(A(k, j), bv)));
        }
        out.valuations.push_back(bv);
    }
    return out;
}

/// Full-pivot triangularization U A P = T: T upper trapezoidal, pivot i is
/// p^{v_i} and every entry right of it has valuation >= v_i.  Only row
/// operations (applied to an optional right-hand side) and a column
/// permutation are performed.
struct Echelon {
    ZpNMatrix T;
    std::vector<std::size_t> perm;  // column j of T is column perm[j] of A
    std::vector<int> valuations;
    // Nonzero entries right of the pivot, per pivot row.
    std::vector<std::vector<std::pair<std::size_t, std::uint64_t>>> upper;
    std::size_t rank() const { return valuations.size(); }
};

inline Echelon echelon(ZpNMatrix A, ZpNMatrix* rhs = nullptr) {
    const ZpN& R = A.ring();
    const int N = R.precision();
    Echelon E;
    E.perm.resize(A.cols());
    for (std::size_t j = 0; j < A.cols(); ++j) E.perm[j] = j;
    const std::size_t n = std::min(A.rows(), A.cols());
    std::vector<std::size_t> support;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t bi = 0, bj = 0;
        int bv = N;
        for (std::size_t i = k; i < A.rows() && bv > 0; ++i) {
            const std::uint64_t* ri = A.row(i);
            for (std::size_t j = k; j < A.cols(); ++j) {
                if (ri[j] == 0) continue;
                const int v = R.valuation(ri[j]);
                if (v < bv) {
                    bv = v;
                    bi = i;
                    bj = j;
                    if (v == 0) break;
                }
            }
        }
        if (bv == N) break;
        A.row_swap(k, bi);
        if (rhs) rhs->row_swap(k, bi);
        A.col_swap(k, bj);
        std::swap(E.perm[k], E.perm[bj]);
        const std::uint64_t u = R.inv(R.div_p_pow(A(k, k), bv));
        A.row_scale(k, u);
        if (rhs) rhs->row_scale(k, u);
        // The operands are sparse: only touch the pivot row's support.
        support.clear();
        const std::uint64_t* rk = A.row(k);
        for (std::size_t j = k; j < A.cols(); ++j)
            if (rk[j]) support.push_back(j);
        const std::uint64_t m = R.modulus();
        for (std::size_t i = k + 1; i < A.rows(); ++i) {
            if (A(i, k) == 0) continue;
            const std::uint64_t c = R.neg(R.div_p_pow(A(i, k), bv));
            std::uint64_t* ri = A.row(i);
            for (std::size_t j : support) ri[j] = (ri[j] + c * rk[j]) % m;
            if (rhs) rhs->row_axpy(i, k, c);
        }
        E.valuations.push_back(bv);
    }
    E.upper.resize(E.rank());
    for (std::size_t i = 0; i < E.rank(); ++i) {
        const std::uint64_t* row = A.row(i);
        for (std::size_t j = i + 1; j < A.cols(); ++j)
            if (row[j]) E.upper[i].emplace_back(j, row[j]);
    }
    E.T = std::move(A);
    return E;
}

namespace detail {

// Back-substitution in permuted coordinates: fills y[0..rank) given y[rank..)
// and the reduced right-hand side b.  Returns false if unsolvable.
inline bool back_substitute(const Echelon& E, const std::vector<std::uint64_t>& b, std::vector<std::uint64_t>& y) {
    const ZpN& R = E.T.ring();
    for (std::size_t ii = E.rank(); ii-- > 0;) {
        std::uint64_t acc = b.empty() ? 0 : b[ii];
        for (const auto& [j, t] : E.upper[ii])
            if (y[j]) acc = R.sub(acc, R.mul(t, y[j]));
        const int v = E.valuations[ii];
        if (R.valuation(acc) < v) return false;
        y[ii] = R.div_p_pow(acc, v);
    }
    return true;
}

}  // namespace detail

/// Generators of ker(A) as columns.
inline ZpNMatrix kernel(const ZpNMatrix& A) {
    const ZpN& R = A.ring();
    const int N = R.precision();
    const Echelon E = echelon(A);
    const std::size_t c = A.cols(), r = E.rank();
    std::vector<std::vector<std::uint64_t>> gens;
    auto emit = [&](std::vector<std::uint64_t>& y) {
        std::vector<std::uint64_t> x(c, 0);
        for (std::size_t j = 0; j < c; ++j) x[E.perm[j]] = y[j];
        gens.push_back(std::move(x));
    };
    for (std::size_t j = r; j < c; ++j) {
        std::vector<std::uint64_t> y(c, 0);
        y[j] = 1 % R.modulus();
        detail::back_substitute(E, {}, y);
        emit(y);
    }
    for (std::size_t i = 0; i < r; ++i) {
        if (E.valuations[i] == 0) continue;
        // y_i = p^{N - v_i}, later coordinates zero; rows above are solvable.
        std::vector<std::uint64_t> y(c, 0);
        y[i] = R.p_pow(N - E.valuations[i]);
        for (std::size_t rr = i; rr-- > 0;) {
            std::uint64_t acc = 0;
            for (const auto& [j, t] : E.upper[rr])
                if (j <= i && y[j]) acc = R.sub(acc, R.mul(t, y[j]));
            y[rr] = R.div_p_pow(acc, E.valuations[rr]);
        }
        emit(y);
    }
    ZpNMatrix K(c, gens.size(), R);
    for (std::size_t g = 0; g < gens.size(); ++g)
        for (std::size_t k = 0; k < c; ++k) K(k, g) = gens[g][k];
    return K;
}

/// Solve M X = B column by column.  Returns nullopt if some column has no
/// solution.
inline std::optional<ZpNMatrix> solve_many(const ZpNMatrix& M, const ZpNMatrix& B) {
    if (B.rows() != M.rows()) throw std::invalid_argument("solve: shape mismatch");
    const ZpN& R = M.ring();
    ZpNMatrix rhs = B;
    const Echelon E = echelon(M, &rhs);
    ZpNMatrix X(M.cols(), B.cols(), R);
    for (std::size_t q = 0; q < B.cols(); ++q) {
        for (std::size_t i = E.rank(); i < M.rows(); ++i)
            if (rhs(i, q) != 0) return std::nullopt;
        std::vector<std::uint64_t> b(M.rows()), y(M.cols(), 0);
        for (std::size_t i = 0; i < M.rows(); ++i) b[i] = rhs(i, q);
        if (!detail::back_substitute(E, b, y)) return std::nullopt;
        for (std::size_t j = 0; j < M.cols(); ++j) X(E.perm[j], q) = y[j];
    }
    return X;
}

inline std::optional<std::vector<std::uint64_t>> solve(const ZpNMatrix& M, const std::vector<std::uint64_t>& v) {
    ZpNMatrix B(v.size(), 1, M.ring());
    for (std::size_t i = 0; i < v.size(); ++i) B(i, 0) = v[i] % M.ring().modulus();
    auto X = solve_many(M, B);
    if (!X) return std::nullopt;
    return X->column(0);
}

/// Membership of v in the row span of M.
inline bool in_row_span(const ZpNMatrix& M, const std::vector<std::uint64_t>& v) {
    return solve(M.transpose(), v).has_value();
}

// ---------------------------------------------------------------------------
// Cohomology at the middle of V0 --A--> V1 --B--> V2

class MiddleCohomology {
public:
    /// Elementary divisor exponents, descending; free summands report N.
    const std::vector<int>& exponents() const { return exps_; }
    /// Cocycle representatives of the cyclic generators, as columns in V1.
    const ZpNMatrix& representatives() const { return reps_; }

    /// Coordinates of the class of a cocycle z; entry i is taken mod
    /// p^{exponents[i]}.  Throws if z is not a cocycle.
    std::vector<std::uint64_t> coordinates(const std::vector<std::uint64_t>& z) const {
        const ZpN& R = Vinv_.ring();
        const int N = R.precision();
        if (z.size() != Vinv_.cols()) throw std::invalid_argument("coordinates: size mismatch");
        std::vector<std::uint64_t> y = Vinv_.apply(z);
        std::vector<std::uint64_t> c(gen_rows_.size());
        for (std::size_t g = 0; g < gen_rows_.size(); ++g) {
            const std::size_t i = gen_rows_[g];
            const int shift = gen_shift_[g];
            c[g] = R.div_p_pow(y[i], shift);
        }
        for (std::size_t i = 0; i < rank_B_; ++i) {
            const int need = N - kvals_[i];
            if (R.valuation(y[i]) < need) throw std::domain_error("coordinates: not a cocycle");
        }
        std::vector<std::uint64_t> h = relT_.apply(c);
        std::vector<std::uint64_t> out(exps_.size());
        for (std::size_t k = 0; k < exps_.size(); ++k) {
            const std::uint64_t mod = exps_[k] >= N ? R.modulus() : R.p_pow(exps_[k]);
            out[k] = h[summand_rows_[k]] % mod;
        }
        return out;
    }

    friend MiddleCohomology middle_cohomology(const ZpNMatrix& A, const ZpNMatrix& B);

private:
    std::vector<int> exps_;
    ZpNMatrix reps_;
    ZpNMatrix Vinv_;
    std::vector<std::size_t> gen_rows_;
    std::vector<int> gen_shift_;
    std::vector<int> kvals_;
    std::size_t rank_B_ = 0;
    ZpNMatrix relT_;  // U of the relation Smith form
    std::vector<std::size_t> summand_rows_;
};

inline MiddleCohomology middle_cohomology(const ZpNMatrix& A, const ZpNMatrix& B) {
    const ZpN& R = A.ring();
    const int N = R.precision();
    if (A.rows() != B.cols()) throw std::invalid_argument("middle_cohomology: shape mismatch");
    const std::size_t n1 = A.rows();
    if (B.rows() > 0 && A.cols() > 0 && !(B * A).is_zero()) throw CompositionNonzeroError("middle_cohomology: B*A != 0");

    MiddleCohomology H;
    SmithForm SB = smith_form(B, {.track_V = true, .track_Vinv = true});
    H.Vinv_ = *SB.Vinv;
    H.rank_B_ = SB.rank();
    H.kvals_ = SB.valuations;

    // ker B is generated by V e_i * p^{N - v_i} (order p^{v_i}) and V e_i for
    // i >= rank (free).
    std::vector<int> order;  // annihilator exponent of each generator
    for (std::size_t i = 0; i < n1; ++i) {
        const int v = i < SB.rank() ? SB.valuations[i] : N;
        if (v == 0) continue;
        H.gen_rows_.push_back(i);
        H.gen_shift_.push_back(i < SB.rank() ? N - v : 0);
        order.push_back(v);
    }
    const std::size_t k = H.gen_rows_.size();

    // Relations: p^{order_g} e_g and the coordinates of the columns of A.
    ZpNMatrix YA = *SB.Vinv * A;
    ZpNMatrix rel(k, k + A.cols(), R);
    for (std::size_t g = 0; g < k; ++g) {
        rel(g, g) = R.p_pow(order[g]);
        const std::size_t i = H.gen_rows_[g];
        for (std::size_t c = 0; c < A.cols(); ++c) rel(g, k + c) = R.div_p_pow(YA(i, c), H.gen_shift_[g]);
    }
    SmithForm SR = smith_form(rel, {.track_U = true, .track_Uinv = true});
    H.relT_ = *SR.U;

    // Summand j is cyclic of order p^{e_j}: e_j is the diagonal valuation, or N
    // when the diagonal entry vanishes.
    struct Summand {
        int e;
        std::size_t row;
    };
    std::vector<Summand> sums;
    for (std::size_t j = 0; j < k; ++j) {
        const int e = j < SR.rank() ? SR.valuations[j] : N;
        if (e > 0) sums.push_back({e, j});
    }
    std::stable_sort(sums.begin(), sums.end(), [](const Summand& a, const Summand& b) { return a.e > b.e; });

    // Representative of summand j: generators combined by column j of U^{-1}.
    ZpNMatrix Z(n1, k, R);  // kernel generators
    ZpNMatrix V = SB.Vt->transpose();
    for (std::size_t g = 0; g < k; ++g) {
        const std::uint64_t s = H.gen_shift_[g] == 0 ? 1 % R.modulus() : R.p_pow(H.gen_shift_[g]);
        for (std::size_t r = 0; r < n1; ++r) Z(r, g) = R.mul(V(r, H.gen_rows_[g]), s);
    }
    ZpNMatrix Uinv = SR.Uinv->transpose();
    H.reps_ = ZpNMatrix(n1, sums.size(), R);
    for (std::size_t t = 0; t < sums.size(); ++t) {
        H.exps_.push_back(sums[t].e);
        H.summand_rows_.push_back(sums[t].row);
        std::vector<std::uint64_t> combo(k);
        for (std::size_t g = 0; g < k; ++g) combo[g] = Uinv(g, sums[t].row);
        std::vector<std::uint64_t> rep = Z.apply(combo);
        for (std::size_t r = 0; r < n1; ++r) H.reps_(r, t) = rep[r];
    }
    return H;
}

/// Exponent lists only.
inline std::vector<int> cohomology_exponents(const ZpNMatrix& A, const ZpNMatrix& B) {
    return middle_cohomology(A, B).exponents();
}

}  // namespace dpcrys
