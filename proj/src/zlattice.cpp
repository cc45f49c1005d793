#include "hn/zlattice.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "hn/errors.hpp"

namespace hn {

ZMatrix ZMatrix::identity(size_t n) {
    ZMatrix m(n, n);
    for (size_t i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
}

ZMatrix ZMatrix::from_columns(size_t rows, const std::vector<std::vector<Int>>& cols) {
    ZMatrix m(rows, cols.size());
    for (size_t j = 0; j < cols.size(); ++j) {
        if (cols[j].size() != rows) throw InvalidInput("ZMatrix column length mismatch");
        for (size_t i = 0; i < rows; ++i) m.at(i, j) = cols[j][i];
    }
    return m;
}

std::vector<Int> ZMatrix::column(size_t j) const {
    std::vector<Int> c(rows_);
    for (size_t i = 0; i < rows_; ++i) c[i] = at(i, j);
    return c;
}

ZMatrix ZMatrix::augment(const ZMatrix& o) const {
    if (rows_ != o.rows_) throw InvalidInput("ZMatrix augment shape mismatch");
    ZMatrix r(rows_, cols_ + o.cols_);
    for (size_t i = 0; i < rows_; ++i) {
        for (size_t j = 0; j < cols_; ++j) r.at(i, j) = at(i, j);
        for (size_t j = 0; j < o.cols_; ++j) r.at(i, cols_ + j) = o.at(i, j);
    }
    return r;
}

ZMatrix ZMatrix::operator*(const ZMatrix& o) const {
    if (cols_ != o.rows_) throw InvalidInput("ZMatrix product shape mismatch");
    ZMatrix r(rows_, o.cols_);
    for (size_t i = 0; i < rows_; ++i)
        for (size_t j = 0; j < o.cols_; ++j) {
            Int acc = 0;
            for (size_t t = 0; t < cols_; ++t) acc += at(i, t) * o.at(t, j);
            r.at(i, j) = acc;
        }
    return r;
}

std::string ZMatrix::str() const {
    std::ostringstream os;
    for (size_t i = 0; i < rows_; ++i) {
        os << (i ? "; " : "");
        for (size_t j = 0; j < cols_; ++j) os << (j ? " " : "") << at(i, j).get_str();
    }
    return os.str();
}

ZMatrix hermite_normal_form(const ZMatrix& gens) {
    const size_t rows = gens.rows();
    ZMatrix m = gens;
    size_t col_start = 0;
    for (size_t r = 0; r < rows && col_start < m.cols(); ++r) {
        // gcd-reduce row r across columns >= col_start
        while (true) {
            size_t nz = m.cols();
            for (size_t j = col_start; j < m.cols(); ++j)
                if (m.at(r, j) != 0) { nz = j; break; }
            if (nz == m.cols()) break; // row r is zero beyond col_start
            // find column with minimal |entry| in row r
            size_t best = nz;
            for (size_t j = nz + 1; j < m.cols(); ++j) {
                if (m.at(r, j) == 0) continue;
                if (cmp(abs(m.at(r, j)), abs(m.at(r, best))) < 0) best = j;
            }
            if (best != col_start)
                for (size_t i = 0; i < rows; ++i) std::swap(m.at(i, best), m.at(i, col_start));
            if (m.at(r, col_start) < 0)
                for (size_t i = 0; i < rows; ++i) m.at(i, col_start) = -m.at(i, col_start);
            bool cleared = true;
            for (size_t j = col_start + 1; j < m.cols(); ++j) {
                if (m.at(r, j) == 0) continue;
                Int q;
                mpz_fdiv_q(q.get_mpz_t(), m.at(r, j).get_mpz_t(), m.at(r, col_start).get_mpz_t());
                for (size_t i = 0; i < rows; ++i) m.at(i, j) -= q * m.at(i, col_start);
                if (m.at(r, j) != 0) cleared = false;
            }
            if (cleared) break;
        }
        if (col_start < m.cols() && m.at(r, col_start) != 0) {
            // reduce earlier columns' row-r entries mod pivot
            for (size_t j = 0; j < col_start; ++j) {
                Int q;
                mpz_fdiv_q(q.get_mpz_t(), m.at(r, j).get_mpz_t(), m.at(r, col_start).get_mpz_t());
                if (q != 0)
                    for (size_t i = 0; i < rows; ++i) m.at(i, j) -= q * m.at(i, col_start);
            }
            ++col_start;
        }
    }
    // keep the first col_start columns (the rest are zero)
    ZMatrix out(rows, col_start);
    for (size_t i = 0; i < rows; ++i)
        for (size_t j = 0; j < col_start; ++j) out.at(i, j) = m.at(i, j);
    return out;
}

SmithDecomposition smith_decompose(const ZMatrix& gens) {
    const size_t rows = gens.rows();
    ZMatrix a = gens;
    ZMatrix basis = ZMatrix::identity(rows); // tracks B * U^{-1} under row ops on a
    const size_t cols = a.cols();

    auto row_op = [&](size_t dst, size_t src, const Int& q) {
        // a: row_dst -= q * row_src; basis: col_src += q * col_dst
        for (size_t j = 0; j < cols; ++j) a.at(dst, j) -= q * a.at(src, j);
        for (size_t i = 0; i < rows; ++i) basis.at(i, src) += q * basis.at(i, dst);
    };
    auto row_swap = [&](size_t i1, size_t i2) {
        for (size_t j = 0; j < cols; ++j) std::swap(a.at(i1, j), a.at(i2, j));
        for (size_t i = 0; i < rows; ++i) std::swap(basis.at(i, i1), basis.at(i, i2));
    };
    auto row_negate = [&](size_t r) {
        for (size_t j = 0; j < cols; ++j) a.at(r, j) = -a.at(r, j);
        for (size_t i = 0; i < rows; ++i) basis.at(i, r) = -basis.at(i, r);
    };
    auto col_op = [&](size_t dst, size_t src, const Int& q) {
        for (size_t i = 0; i < rows; ++i) a.at(i, dst) -= q * a.at(i, src);
    };
    auto col_swap = [&](size_t j1, size_t j2) {
        for (size_t i = 0; i < rows; ++i) std::swap(a.at(i, j1), a.at(i, j2));
    };

    std::vector<Int> divisors;
    size_t t = 0;
    const size_t tmax = std::min(rows, cols);
    while (t < tmax) {
        // find nonzero entry of minimal absolute value
        bool found = false;
        size_t pi = 0, pj = 0;
        for (size_t i = t; i < rows; ++i)
            for (size_t j = t; j < cols; ++j) {
                if (a.at(i, j) == 0) continue;
                if (!found || cmp(abs(a.at(i, j)), abs(a.at(pi, pj))) < 0) {
                    found = true;
                    pi = i;
                    pj = j;
                }
            }
        if (!found) break;
        if (pi != t) row_swap(pi, t);
        if (pj != t) col_swap(pj, t);
        if (a.at(t, t) < 0) row_negate(t);
        bool dirty = true;
        while (dirty) {
            dirty = false;
            for (size_t i = t + 1; i < rows; ++i) {
                if (a.at(i, t) == 0) continue;
                Int q;
                mpz_fdiv_q(q.get_mpz_t(), a.at(i, t).get_mpz_t(), a.at(t, t).get_mpz_t());
                row_op(i, t, q);
                if (a.at(i, t) != 0) { row_swap(i, t); dirty = true; }
            }
            for (size_t j = t + 1; j < cols; ++j) {
                if (a.at(t, j) == 0) continue;
                Int q;
                mpz_fdiv_q(q.get_mpz_t(), a.at(t, j).get_mpz_t(), a.at(t, t).get_mpz_t());
                col_op(j, t, q);
                if (a.at(t, j) != 0) { col_swap(j, t); dirty = true; }
            }
            if (a.at(t, t) < 0) row_negate(t);
        }
        // enforce divisibility of the remaining block by the pivot
        bool fixed = true;
        for (size_t i = t + 1; i < rows && fixed; ++i)
            for (size_t j = t + 1; j < cols && fixed; ++j) {
                if (a.at(i, j) % a.at(t, t) != 0) {
                    // add row i to row t and restart this pivot
                    row_op(t, i, Int(-1));
                    fixed = false;
                }
            }
        if (!fixed) continue;
        divisors.push_back(a.at(t, t));
        ++t;
    }
    SmithDecomposition out;
    out.divisors.assign(rows, Int(0));
    for (size_t i = 0; i < divisors.size(); ++i) out.divisors[i] = divisors[i];
    out.basis = basis;
    return out;
}

ZMatrix saturate_lattice(const ZMatrix& gens) {
    auto smith = smith_decompose(gens);
    size_t r = 0;
    for (const auto& d : smith.divisors)
        if (d != 0) ++r;
    ZMatrix out(gens.rows(), r);
    for (size_t i = 0; i < gens.rows(); ++i)
        for (size_t j = 0; j < r; ++j) out.at(i, j) = smith.basis.at(i, j);
    return out;
}

ZMatrix solve_lower_triangular(const ZMatrix& b, const ZMatrix& rhs) {
    const size_t n = b.rows();
    if (b.cols() != n || rhs.rows() != n) throw InvalidInput("solve_lower_triangular shape");
    ZMatrix x(n, rhs.cols());
    for (size_t c = 0; c < rhs.cols(); ++c) {
        for (size_t i = 0; i < n; ++i) {
            Int acc = rhs.at(i, c);
            for (size_t j = 0; j < i; ++j) acc -= b.at(i, j) * x.at(j, c);
            if (b.at(i, i) == 0 || acc % b.at(i, i) != 0)
                throw ArithmeticError("solve_lower_triangular: inexact division");
            x.at(i, c) = acc / b.at(i, i);
        }
    }
    return x;
}

ZMatrix z_coordinates_in(const ZMatrix& basis, const ZMatrix& vecs) {
    const size_t n = basis.rows(), c = basis.cols();
    if (vecs.rows() != n) throw InvalidInput("z_coordinates_in shape mismatch");
    // rational row reduction of [basis | vecs]
    std::vector<std::vector<Rat>> m(n, std::vector<Rat>(c + vecs.cols(), Rat(0)));
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < c; ++j) m[i][j] = Rat(basis.at(i, j));
        for (size_t j = 0; j < vecs.cols(); ++j) m[i][c + j] = Rat(vecs.at(i, j));
    }
    std::vector<long> pivot_row_of(c, -1);
    size_t rr = 0;
    for (size_t j = 0; j < c; ++j) {
        size_t piv = n;
        for (size_t i = rr; i < n; ++i)
            if (m[i][j] != 0) { piv = i; break; }
        if (piv == n) throw ArithmeticError("z_coordinates_in: dependent basis columns");
        std::swap(m[rr], m[piv]);
        Rat inv = Rat(1) / m[rr][j];
        for (size_t jj = 0; jj < c + vecs.cols(); ++jj) m[rr][jj] *= inv;
        for (size_t i = 0; i < n; ++i) {
            if (i == rr || m[i][j] == 0) continue;
            Rat f = m[i][j];
            for (size_t jj = 0; jj < c + vecs.cols(); ++jj) m[i][jj] -= f * m[rr][jj];
        }
        pivot_row_of[j] = static_cast<long>(rr);
        ++rr;
    }
    for (size_t i = rr; i < n; ++i)
        for (size_t j = 0; j < vecs.cols(); ++j)
            if (m[i][c + j] != 0)
                throw ArithmeticError("z_coordinates_in: vector outside the column span");
    ZMatrix x(c, vecs.cols());
    for (size_t j = 0; j < c; ++j)
        for (size_t jc = 0; jc < vecs.cols(); ++jc) {
            const Rat& q = m[static_cast<size_t>(pivot_row_of[j])][c + jc];
            if (!is_integer(q)) throw ArithmeticError("z_coordinates_in: non-integral coordinate");
            x.at(j, jc) = q.get_num();
        }
    return x;
}

HowellForm::HowellForm(Int p, int e, size_t s, const ZMatrix& gens)
    : p_(std::move(p)), e_(e), s_(s) {
    if (e_ < 0) throw InvalidInput("HowellForm: negative exponent");
    mpz_pow_ui(modulus_.get_mpz_t(), p_.get_mpz_t(), static_cast<unsigned long>(e_));
    reduce(gens);
}

namespace {

long val_mod(const Int& x, const Int& p, int e) {
    // valuation of x mod p^e, with e meaning "zero"
    if (x == 0) return e;
    long v = vp_int(x, p);
    return std::min<long>(v, e);
}

} // namespace

void HowellForm::reduce(ZMatrix gens) {
    if (e_ == 0 || s_ == 0) { m_ = ZMatrix(s_, 0); return; }
    if (gens.rows() != s_) throw InvalidInput("HowellForm: generator length mismatch");
    // working pool of columns mod p^e
    std::vector<std::vector<Int>> pool;
    for (size_t j = 0; j < gens.cols(); ++j) {
        auto c = gens.column(j);
        for (auto& x : c) { mpz_fdiv_r(x.get_mpz_t(), x.get_mpz_t(), modulus_.get_mpz_t()); }
        pool.push_back(std::move(c));
    }
    std::vector<std::vector<Int>> cols;          // echelon columns
    std::vector<size_t> prow;
    std::vector<long> pval;

    auto insert = [&](std::vector<Int> x) {
        while (true) {
            size_t r = s_;
            for (size_t i = 0; i < s_; ++i)
                if (x[i] != 0) { r = i; break; }
            if (r == s_) return; // reduced to zero
            long vx = val_mod(x[r], p_, e_);
            // find existing column with this pivot row
            size_t slot = cols.size();
            for (size_t c = 0; c < cols.size(); ++c)
                if (prow[c] == r) { slot = c; break; }
            if (slot == cols.size()) {
                // normalize: divide off the unit
                Int pl;
                mpz_pow_ui(pl.get_mpz_t(), p_.get_mpz_t(), static_cast<unsigned long>(vx));
                Int u = x[r] / pl;
                Int uinv;
                if (mpz_invert(uinv.get_mpz_t(), u.get_mpz_t(), modulus_.get_mpz_t()) == 0)
                    throw ArithmeticError("HowellForm: unit inversion failed");
                for (auto& t : x) {
                    t = t * uinv;
                    mpz_fdiv_r(t.get_mpz_t(), t.get_mpz_t(), modulus_.get_mpz_t());
                }
                cols.push_back(std::move(x));
                prow.push_back(r);
                pval.push_back(vx);
                return;
            }
            if (pval[slot] <= vx) {
                // eliminate x at row r using the column
                Int pl;
                mpz_pow_ui(pl.get_mpz_t(), p_.get_mpz_t(), static_cast<unsigned long>(pval[slot]));
                Int q = x[r] / pl;
                for (size_t i = 0; i < s_; ++i) {
                    x[i] -= q * cols[slot][i];
                    mpz_fdiv_r(x[i].get_mpz_t(), x[i].get_mpz_t(), modulus_.get_mpz_t());
                }
            } else {
                // swap roles: x has the smaller valuation at this pivot row
                std::swap(x, cols[slot]);
                std::swap(vx, pval[slot]);
                // renormalize the new column in the slot
                Int pl;
                mpz_pow_ui(pl.get_mpz_t(), p_.get_mpz_t(), static_cast<unsigned long>(pval[slot]));
                Int u = cols[slot][prow[slot]] / pl;
                Int uinv;
                if (mpz_invert(uinv.get_mpz_t(), u.get_mpz_t(), modulus_.get_mpz_t()) == 0)
                    throw ArithmeticError("HowellForm: unit inversion failed");
                for (auto& t : cols[slot]) {
                    t = t * uinv;
                    mpz_fdiv_r(t.get_mpz_t(), t.get_mpz_t(), modulus_.get_mpz_t());
                }
            }
        }
    };

    for (auto& c : pool) insert(std::move(c));
    // Howell completion: p^{e-l} times a column with pivot valuation l > 0 may
    // have a new, lower pivot row; iterate to closure.
    bool grew = true;
    while (grew) {
        grew = false;
        size_t count = cols.size();
        for (size_t c = 0; c < count; ++c) {
            if (pval[c] == 0) continue;
            Int mult;
            mpz_pow_ui(mult.get_mpz_t(), p_.get_mpz_t(), static_cast<unsigned long>(e_ - pval[c]));
            std::vector<Int> x(s_);
            for (size_t i = 0; i < s_; ++i) {
                x[i] = cols[c][i] * mult;
                mpz_fdiv_r(x[i].get_mpz_t(), x[i].get_mpz_t(), modulus_.get_mpz_t());
            }
            size_t before = cols.size();
            insert(std::move(x));
            if (cols.size() != before) grew = true;
        }
    }
    // order columns by pivot row
    std::vector<size_t> order(cols.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return prow[a] < prow[b]; });
    std::vector<std::vector<Int>> sorted;
    std::vector<size_t> srow;
    std::vector<long> sval;
    for (size_t idx : order) {
        sorted.push_back(cols[idx]);
        srow.push_back(prow[idx]);
        sval.push_back(pval[idx]);
    }
    // final canonical reduction: entry of column i at a later pivot row r_j is
    // reduced mod p^{l_j}
    for (size_t i = 0; i < sorted.size(); ++i) {
        for (size_t j = i + 1; j < sorted.size(); ++j) {
            size_t r = srow[j];
            Int pl;
            mpz_pow_ui(pl.get_mpz_t(), p_.get_mpz_t(), static_cast<unsigned long>(sval[j]));
            Int q;
            mpz_fdiv_q(q.get_mpz_t(), sorted[i][r].get_mpz_t(), pl.get_mpz_t());
            if (q != 0) {
                for (size_t t = 0; t < s_; ++t) {
                    sorted[i][t] -= q * sorted[j][t];
                    mpz_fdiv_r(sorted[i][t].get_mpz_t(), sorted[i][t].get_mpz_t(),
                               modulus_.get_mpz_t());
                }
            }
        }
    }
    m_ = ZMatrix::from_columns(s_, sorted);
    pivot_row_ = std::move(srow);
    pivot_val_ = std::move(sval);
}

long HowellForm::height() const {
    long h = 0;
    for (long v : pivot_val_) h += e_ - v;
    return h;
}

bool HowellForm::contains(const std::vector<Int>& x0) const {
    std::vector<Int> x(x0);
    if (x.size() != s_) throw InvalidInput("HowellForm::contains: length mismatch");
    for (auto& t : x) mpz_fdiv_r(t.get_mpz_t(), t.get_mpz_t(), modulus_.get_mpz_t());
    for (size_t c = 0; c < m_.cols(); ++c) {
        size_t r = pivot_row_[c];
        if (x[r] == 0) continue;
        long v = val_mod(x[r], p_, e_);
        if (v < pivot_val_[c]) return false;
        Int pl;
        mpz_pow_ui(pl.get_mpz_t(), p_.get_mpz_t(), static_cast<unsigned long>(pivot_val_[c]));
        Int q = x[r] / pl;
        for (size_t i = 0; i < s_; ++i) {
            x[i] -= q * m_.at(i, c);
            mpz_fdiv_r(x[i].get_mpz_t(), x[i].get_mpz_t(), modulus_.get_mpz_t());
        }
    }
    for (const auto& t : x)
        if (t != 0) return false;
    return true;
}

bool HowellForm::contains(const HowellForm& other) const {
    for (size_t j = 0; j < other.m_.cols(); ++j)
        if (!contains(other.m_.column(j))) return false;
    return true;
}

HowellForm HowellForm::join(const HowellForm& other) const {
    if (other.s_ != s_ || other.modulus_ != modulus_)
        throw InvalidInput("HowellForm::join: ambient mismatch");
    return HowellForm(p_, e_, s_, m_.augment(other.m_));
}

HowellForm HowellForm::join_element(const std::vector<Int>& x) const {
    ZMatrix g = m_.augment(ZMatrix::from_columns(s_, {x}));
    return HowellForm(p_, e_, s_, g);
}

HowellForm HowellForm::p_multiple(long t) const {
    Int mult;
    mpz_pow_ui(mult.get_mpz_t(), p_.get_mpz_t(), static_cast<unsigned long>(t));
    ZMatrix g(s_, m_.cols());
    for (size_t i = 0; i < s_; ++i)
        for (size_t j = 0; j < m_.cols(); ++j) g.at(i, j) = m_.at(i, j) * mult;
    return HowellForm(p_, e_, s_, g);
}

namespace {

// Nullspace basis of an s x t matrix over F_p (entries reduced mod p).
std::vector<std::vector<Int>> fp_nullspace(const ZMatrix& a, const Int& p) {
    const size_t rows = a.rows(), cols = a.cols();
    ZMatrix m = a;
    for (size_t i = 0; i < rows; ++i)
        for (size_t j = 0; j < cols; ++j)
            mpz_fdiv_r(m.at(i, j).get_mpz_t(), m.at(i, j).get_mpz_t(), p.get_mpz_t());
    std::vector<long> pivot_of_col(cols, -1);
    size_t rr = 0;
    for (size_t j = 0; j < cols && rr < rows; ++j) {
        size_t piv = rows;
        for (size_t i = rr; i < rows; ++i)
            if (m.at(i, j) != 0) { piv = i; break; }
        if (piv == rows) continue;
        if (piv != rr)
            for (size_t jj = 0; jj < cols; ++jj) std::swap(m.at(rr, jj), m.at(piv, jj));
        Int inv;
        if (mpz_invert(inv.get_mpz_t(), m.at(rr, j).get_mpz_t(), p.get_mpz_t()) == 0)
            throw ArithmeticError("fp_nullspace: inversion failed");
        for (size_t jj = 0; jj < cols; ++jj) {
            m.at(rr, jj) = m.at(rr, jj) * inv;
            mpz_fdiv_r(m.at(rr, jj).get_mpz_t(), m.at(rr, jj).get_mpz_t(), p.get_mpz_t());
        }
        for (size_t i = 0; i < rows; ++i) {
            if (i == rr || m.at(i, j) == 0) continue;
            Int q = m.at(i, j);
            for (size_t jj = 0; jj < cols; ++jj) {
                m.at(i, jj) -= q * m.at(rr, jj);
                mpz_fdiv_r(m.at(i, jj).get_mpz_t(), m.at(i, jj).get_mpz_t(), p.get_mpz_t());
            }
        }
        pivot_of_col[j] = static_cast<long>(rr);
        ++rr;
    }
    std::vector<std::vector<Int>> basis;
    for (size_t j = 0; j < cols; ++j) {
        if (pivot_of_col[j] >= 0) continue;
        std::vector<Int> v(cols, Int(0));
        v[j] = 1;
        for (size_t jj = 0; jj < cols; ++jj) {
            if (pivot_of_col[jj] < 0) continue;
            Int val = -m.at(static_cast<size_t>(pivot_of_col[jj]), j);
            mpz_fdiv_r(val.get_mpz_t(), val.get_mpz_t(), p.get_mpz_t());
            v[jj] = val;
        }
        basis.push_back(std::move(v));
    }
    return basis;
}

} // namespace

HowellForm HowellForm::p_preimage() const {
    // {x : p x in L} = (1/p)(L ∩ pA) + ker(x -> px). L ∩ pA is spanned by the
    // p-multiples of the columns together with the combinations prescribed by
    // the mod-p kernel of the column matrix.
    std::vector<std::vector<Int>> gens;
    for (size_t j = 0; j < m_.cols(); ++j) gens.push_back(m_.column(j)); // (1/p)(p*col)
    for (const auto& b : fp_nullspace(m_, p_)) {
        std::vector<Int> w(s_, Int(0));
        for (size_t j = 0; j < m_.cols(); ++j)
            for (size_t i = 0; i < s_; ++i) w[i] += b[j] * m_.at(i, j);
        for (auto& x : w) {
            mpz_fdiv_r(x.get_mpz_t(), x.get_mpz_t(), modulus_.get_mpz_t());
            if (x % p_ != 0) throw ArithmeticError("p_preimage: kernel vector not divisible");
            x /= p_;
        }
        gens.push_back(std::move(w));
    }
    Int pk;
    mpz_pow_ui(pk.get_mpz_t(), p_.get_mpz_t(), static_cast<unsigned long>(e_ - 1));
    for (size_t i = 0; i < s_; ++i) {
        std::vector<Int> e(s_, Int(0));
        e[i] = pk;
        gens.push_back(std::move(e));
    }
    return HowellForm(p_, e_, s_, ZMatrix::from_columns(s_, gens));
}

bool HowellForm::operator==(const HowellForm& o) const {
    return s_ == o.s_ && modulus_ == o.modulus_ && m_ == o.m_;
}

std::string HowellForm::key() const {
    return m_.str();
}

} // namespace hn
