#include "hn/valring.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>

namespace hn {

namespace {

bool is_prime(long p) {
    if (p < 2) return false;
    for (long d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

std::atomic<size_t> g_bits_guard{size_t(1) << 20};

} // namespace

size_t bits_guard() { return g_bits_guard.load(); }
void set_bits_guard(size_t bits) { g_bits_guard.store(bits); }

FieldConfig FieldConfig::make(long p, int k) {
    if (!is_prime(p)) throw InvalidInput("field config: p must be prime");
    if (k < 1) throw InvalidInput("field config: k must be >= 1");
    return FieldConfig{p, k};
}

FieldElement::FieldElement(FieldConfig f, std::vector<Rat> coeffs)
    : field_(f), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != static_cast<size_t>(field_.k))
        throw InvalidInput("element needs exactly k coefficients");
    check_guard();
}

void FieldElement::check_guard() const {
    const size_t guard = bits_guard();
    for (const auto& c : coeffs_) {
        size_t bits = mpz_sizeinbase(c.get_num().get_mpz_t(), 2) +
                      mpz_sizeinbase(c.get_den().get_mpz_t(), 2);
        if (bits > guard)
            throw ResourceError("rational bit-size guard exceeded (" + std::to_string(bits) +
                                " > " + std::to_string(guard) + " bits)");
    }
}

FieldElement FieldElement::zero(FieldConfig f) {
    return FieldElement(f, std::vector<Rat>(f.k, Rat(0)));
}

FieldElement FieldElement::one(FieldConfig f) {
    return from_rat(f, Rat(1));
}

FieldElement FieldElement::from_rat(FieldConfig f, const Rat& q) {
    std::vector<Rat> c(f.k, Rat(0));
    c[0] = q;
    return FieldElement(f, std::move(c));
}

FieldElement FieldElement::monomial(FieldConfig f, const Rat& coeff, int i) {
    if (i < 0 || i >= f.k) throw InvalidInput("monomial exponent out of range");
    std::vector<Rat> c(f.k, Rat(0));
    c[i] = coeff;
    return FieldElement(f, std::move(c));
}

FieldElement FieldElement::pi_pow(FieldConfig f, long j) {
    long q = j >= 0 ? j / f.k : -(((-j) + f.k - 1) / f.k);
    long r = j - q * f.k; // 0 <= r < k
    Rat coeff = 1;
    Int pw;
    mpz_pow_ui(pw.get_mpz_t(), f.pz().get_mpz_t(), static_cast<unsigned long>(q >= 0 ? q : -q));
    if (q >= 0) coeff = Rat(pw);
    else coeff = Rat(1) / Rat(pw);
    return monomial(f, coeff, static_cast<int>(r));
}

bool FieldElement::is_zero() const {
    for (const auto& c : coeffs_)
        if (c != 0) return false;
    return true;
}

Val FieldElement::valuation() const {
    Val best = Val::inf();
    for (int i = 0; i < field_.k; ++i) {
        if (coeffs_[i] == 0) continue;
        Rat v = Rat(vp_rat(coeffs_[i], field_.pz())) + Rat(i, field_.k);
        v.canonicalize();
        Val cand = Val::of(v);
        if (cand < best) best = cand;
    }
    return best;
}

FieldElement FieldElement::operator-() const {
    std::vector<Rat> c(coeffs_);
    for (auto& x : c) x = -x;
    return FieldElement(field_, std::move(c));
}

FieldElement FieldElement::operator+(const FieldElement& o) const {
    if (field_ != o.field_) throw InvalidInput("field mismatch in +");
    std::vector<Rat> c(coeffs_);
    for (int i = 0; i < field_.k; ++i) c[i] += o.coeffs_[i];
    return FieldElement(field_, std::move(c));
}

FieldElement FieldElement::operator-(const FieldElement& o) const {
    return *this + (-o);
}

FieldElement FieldElement::operator*(const FieldElement& o) const {
    if (field_ != o.field_) throw InvalidInput("field mismatch in *");
    const int k = field_.k;
    std::vector<Rat> c(k, Rat(0));
    Rat p(field_.p);
    for (int i = 0; i < k; ++i) {
        if (coeffs_[i] == 0) continue;
        for (int j = 0; j < k; ++j) {
            if (o.coeffs_[j] == 0) continue;
            int e = i + j;
            Rat term = coeffs_[i] * o.coeffs_[j];
            if (e >= k) { // pi^k = p
                e -= k;
                term *= p;
            }
            c[e] += term;
        }
    }
    return FieldElement(field_, std::move(c));
}

FieldElement FieldElement::inverse() const {
    if (is_zero()) throw ArithmeticError("division by zero in K");
    const int k = field_.k;
    // Solve (this) * z = 1 via the k x k multiplication matrix over Q.
    // Column j of M is the coefficient vector of (this) * pi^j.
    std::vector<std::vector<Rat>> m(k, std::vector<Rat>(k, Rat(0)));
    Rat p(field_.p);
    for (int j = 0; j < k; ++j) {
        for (int i = 0; i < k; ++i) {
            if (coeffs_[i] == 0) continue;
            int e = i + j;
            Rat term = coeffs_[i];
            if (e >= k) { e -= k; term *= p; }
            m[e][j] += term;
        }
    }
    std::vector<Rat> rhs(k, Rat(0));
    rhs[0] = 1;
    // Gaussian elimination with partial (first nonzero) pivoting.
    std::vector<int> perm(k);
    for (int i = 0; i < k; ++i) perm[i] = i;
    for (int col = 0; col < k; ++col) {
        int piv = -1;
        for (int r = col; r < k; ++r)
            if (m[r][col] != 0) { piv = r; break; }
        if (piv < 0) throw ArithmeticError("singular multiplication matrix");
        std::swap(m[col], m[piv]);
        std::swap(rhs[col], rhs[piv]);
        for (int r = 0; r < k; ++r) {
            if (r == col || m[r][col] == 0) continue;
            Rat f = m[r][col] / m[col][col];
            for (int cc = col; cc < k; ++cc) m[r][cc] -= f * m[col][cc];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<Rat> z(k);
    for (int i = 0; i < k; ++i) z[i] = rhs[i] / m[i][i];
    return FieldElement(field_, std::move(z));
}

FieldElement FieldElement::operator/(const FieldElement& o) const {
    return *this * o.inverse();
}

FieldElement FieldElement::scale(const Rat& q) const {
    std::vector<Rat> c(coeffs_);
    for (auto& x : c) x *= q;
    return FieldElement(field_, std::move(c));
}

FieldElement FieldElement::times_p_pow(long e) const {
    Int pw;
    mpz_pow_ui(pw.get_mpz_t(), field_.pz().get_mpz_t(),
               static_cast<unsigned long>(e >= 0 ? e : -e));
    Rat q = e >= 0 ? Rat(pw) : Rat(1) / Rat(pw);
    return scale(q);
}

bool FieldElement::operator==(const FieldElement& o) const {
    return field_ == o.field_ && coeffs_ == o.coeffs_;
}

FieldElement FieldElement::embed(int m) const {
    if (m < 1) throw InvalidInput("embed: m must be >= 1");
    FieldConfig g = FieldConfig::make(field_.p, field_.k * m);
    std::vector<Rat> c(g.k, Rat(0));
    for (int i = 0; i < field_.k; ++i) c[i * m] = coeffs_[i];
    return FieldElement(g, std::move(c));
}

std::string FieldElement::str() const {
    std::ostringstream os;
    os << "[";
    for (int i = 0; i < field_.k; ++i) {
        if (i) os << ",";
        os << rat_to_string(coeffs_[i]);
    }
    os << "]";
    return os.str();
}

KMatrix::KMatrix(FieldConfig f, size_t rows, size_t cols)
    : field_(f), rows_(rows), cols_(cols), data_(rows * cols, FieldElement::zero(f)) {}

KMatrix KMatrix::identity(FieldConfig f, size_t n) {
    KMatrix m(f, n, n);
    for (size_t i = 0; i < n; ++i) m.at(i, i) = FieldElement::one(f);
    return m;
}

KMatrix KMatrix::from_columns(FieldConfig f, size_t rows,
                              const std::vector<std::vector<FieldElement>>& cols) {
    KMatrix m(f, rows, cols.size());
    for (size_t j = 0; j < cols.size(); ++j) {
        if (cols[j].size() != rows) throw InvalidInput("column length mismatch");
        for (size_t i = 0; i < rows; ++i) m.at(i, j) = cols[j][i];
    }
    return m;
}

std::vector<FieldElement> KMatrix::column(size_t j) const {
    std::vector<FieldElement> c;
    c.reserve(rows_);
    for (size_t i = 0; i < rows_; ++i) c.push_back(at(i, j));
    return c;
}

KMatrix KMatrix::transpose() const {
    KMatrix t(field_, cols_, rows_);
    for (size_t i = 0; i < rows_; ++i)
        for (size_t j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
    return t;
}

KMatrix KMatrix::operator*(const KMatrix& o) const {
    if (cols_ != o.rows_) throw InvalidInput("matrix product shape mismatch");
    KMatrix r(field_, rows_, o.cols_);
    for (size_t i = 0; i < rows_; ++i)
        for (size_t j = 0; j < o.cols_; ++j) {
            FieldElement acc = FieldElement::zero(field_);
            for (size_t t = 0; t < cols_; ++t) acc = acc + at(i, t) * o.at(t, j);
            r.at(i, j) = acc;
        }
    return r;
}

KMatrix KMatrix::augment(const KMatrix& o) const {
    if (rows_ != o.rows_) throw InvalidInput("augment shape mismatch");
    KMatrix r(field_, rows_, cols_ + o.cols_);
    for (size_t i = 0; i < rows_; ++i) {
        for (size_t j = 0; j < cols_; ++j) r.at(i, j) = at(i, j);
        for (size_t j = 0; j < o.cols_; ++j) r.at(i, cols_ + j) = o.at(i, j);
    }
    return r;
}

bool KMatrix::operator==(const KMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
}

TorsionModule TorsionModule::make(FieldConfig f, std::vector<Rat> divisors) {
    // Order is preserved: callers that pair divisors with matrix rows rely on
    // positional alignment.
    for (auto& d : divisors) {
        if (!(d > 0)) throw InvalidInput("torsion divisor must be > 0");
        Rat scaled = d * f.k;
        if (!is_integer(scaled)) throw InvalidInput("torsion divisor outside (1/k)Z");
    }
    return TorsionModule{std::move(divisors)};
}

Rat TorsionModule::degree() const {
    Rat s = 0;
    for (const auto& d : divisors) s += d;
    return s;
}

namespace {

// Shared reduction core. Pivots on the first minimum-valuation entry in
// row-major order, eliminates its row and column by unimodular operations.
DiagonalForm reduce(KMatrix a, bool want_left) {
    const size_t r = a.rows(), c = a.cols();
    const FieldConfig f = a.field();
    for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < c; ++j)
            if (!a.at(i, j).is_zero() && !a.at(i, j).in_ring())
                throw InvalidInput("elementary divisor reduction needs entries in O");

    DiagonalForm out;
    out.left = KMatrix::identity(f, r);
    size_t t = 0;
    const size_t tmax = std::min(r, c);
    while (t < tmax) {
        // locate pivot
        bool found = false;
        Val best = Val::inf();
        size_t pi = 0, pj = 0;
        for (size_t i = t; i < r; ++i) {
            for (size_t j = t; j < c; ++j) {
                if (a.at(i, j).is_zero()) continue;
                Val v = a.at(i, j).valuation();
                if (!found || v < best) {
                    found = true;
                    best = v;
                    pi = i;
                    pj = j;
                }
            }
        }
        if (!found) break;
        // swap into (t, t)
        if (pi != t) {
            for (size_t j = 0; j < c; ++j) std::swap(a.at(t, j), a.at(pi, j));
            if (want_left)
                for (size_t j = 0; j < r; ++j) std::swap(out.left.at(t, j), out.left.at(pi, j));
        }
        if (pj != t)
            for (size_t i = 0; i < r; ++i) std::swap(a.at(i, t), a.at(i, pj));
        const FieldElement piv = a.at(t, t);
        // clear column below/above with row ops
        for (size_t i = 0; i < r; ++i) {
            if (i == t || a.at(i, t).is_zero()) continue;
            FieldElement q = a.at(i, t) / piv;
            for (size_t j = 0; j < c; ++j) a.at(i, j) = a.at(i, j) - q * a.at(t, j);
            if (want_left)
                for (size_t j = 0; j < r; ++j)
                    out.left.at(i, j) = out.left.at(i, j) - q * out.left.at(t, j);
        }
        // clear row with column ops
        for (size_t j = 0; j < c; ++j) {
            if (j == t || a.at(t, j).is_zero()) continue;
            FieldElement q = a.at(t, j) / piv;
            for (size_t i = 0; i < r; ++i) a.at(i, j) = a.at(i, j) - q * a.at(i, t);
        }
        out.divisors.push_back(piv.valuation().finite());
        ++t;
    }
    return out;
}

} // namespace

std::vector<Rat> elementary_divisors(const KMatrix& a) {
    if (a.rows() == 0 || a.cols() == 0) return {};
    auto d = reduce(a, false);
    return d.divisors;
}

DiagonalForm diagonalize_full_rank(const KMatrix& a) {
    auto d = reduce(a, true);
    if (d.divisors.size() != a.rows())
        throw InvalidInput("diagonalize_full_rank: cokernel is not torsion");
    return d;
}

Rat fitting_degree(const KMatrix& generators, const TorsionModule& ambient) {
    const FieldConfig f = generators.field();
    const size_t m = ambient.divisors.size();
    if (generators.rows() != m) throw InvalidInput("fitting_degree: row count != ambient rank");
    for (size_t i = 0; i < generators.rows(); ++i)
        for (size_t j = 0; j < generators.cols(); ++j)
            if (!generators.at(i, j).is_zero() && !generators.at(i, j).in_ring())
                throw InvalidInput("fitting_degree: generator entry with negative valuation");
    if (m == 0) return Rat(0);
    KMatrix rel(f, m, m);
    for (size_t i = 0; i < m; ++i) {
        Rat scaled = ambient.divisors[i] * f.k;
        rel.at(i, i) = FieldElement::pi_pow(f, scaled.get_num().get_si());
    }
    KMatrix pres = generators.cols() ? generators.augment(rel) : rel;
    auto divs = elementary_divisors(pres);
    Rat quotient_deg = 0;
    for (const auto& d : divs) quotient_deg += d;
    Rat deg = ambient.degree() - quotient_deg;
    return deg;
}

size_t rank(const KMatrix& a) {
    KMatrix m = a;
    size_t r = 0;
    size_t rows = m.rows(), cols = m.cols();
    std::vector<bool> used(rows, false);
    for (size_t j = 0; j < cols; ++j) {
        size_t piv = rows;
        for (size_t i = 0; i < rows; ++i)
            if (!used[i] && !m.at(i, j).is_zero()) { piv = i; break; }
        if (piv == rows) continue;
        used[piv] = true;
        ++r;
        for (size_t i = 0; i < rows; ++i) {
            if (i == piv || m.at(i, j).is_zero()) continue;
            FieldElement q = m.at(i, j) / m.at(piv, j);
            for (size_t jj = 0; jj < cols; ++jj) m.at(i, jj) = m.at(i, jj) - q * m.at(piv, jj);
        }
    }
    return r;
}

KMatrix nullspace(const KMatrix& a) {
    const FieldConfig f = a.field();
    const size_t rows = a.rows(), cols = a.cols();
    KMatrix m = a;
    // reduced echelon over K, pivot = first nonzero scanning rows
    std::vector<long> pivot_of_col(cols, -1);
    size_t rank_rows = 0;
    for (size_t j = 0; j < cols && rank_rows < rows; ++j) {
        size_t piv = rows;
        for (size_t i = rank_rows; i < rows; ++i)
            if (!m.at(i, j).is_zero()) { piv = i; break; }
        if (piv == rows) continue;
        if (piv != rank_rows)
            for (size_t jj = 0; jj < cols; ++jj) std::swap(m.at(rank_rows, jj), m.at(piv, jj));
        FieldElement inv = m.at(rank_rows, j).inverse();
        for (size_t jj = 0; jj < cols; ++jj) m.at(rank_rows, jj) = m.at(rank_rows, jj) * inv;
        for (size_t i = 0; i < rows; ++i) {
            if (i == rank_rows || m.at(i, j).is_zero()) continue;
            FieldElement q = m.at(i, j);
            for (size_t jj = 0; jj < cols; ++jj)
                m.at(i, jj) = m.at(i, jj) - q * m.at(rank_rows, jj);
        }
        pivot_of_col[j] = static_cast<long>(rank_rows);
        ++rank_rows;
    }
    std::vector<std::vector<FieldElement>> basis;
    for (size_t j = 0; j < cols; ++j) {
        if (pivot_of_col[j] >= 0) continue;
        std::vector<FieldElement> v(cols, FieldElement::zero(f));
        v[j] = FieldElement::one(f);
        for (size_t jj = 0; jj < cols; ++jj) {
            if (pivot_of_col[jj] < 0) continue;
            v[jj] = -m.at(static_cast<size_t>(pivot_of_col[jj]), j);
        }
        basis.push_back(std::move(v));
    }
    return KMatrix::from_columns(f, cols, basis);
}

KMatrix solve_linear(const KMatrix& a, const KMatrix& b) {
    if (a.rows() != a.cols() || a.rows() != b.rows())
        throw InvalidInput("solve_linear shape mismatch");
    const size_t n = a.rows(), w = b.cols();
    KMatrix m = a.augment(b);
    for (size_t col = 0; col < n; ++col) {
        size_t piv = n;
        for (size_t i = col; i < n; ++i)
            if (!m.at(i, col).is_zero()) { piv = i; break; }
        if (piv == n) throw ArithmeticError("solve_linear: singular matrix");
        if (piv != col)
            for (size_t j = 0; j < n + w; ++j) std::swap(m.at(col, j), m.at(piv, j));
        FieldElement inv = m.at(col, col).inverse();
        for (size_t j = 0; j < n + w; ++j) m.at(col, j) = m.at(col, j) * inv;
        for (size_t i = 0; i < n; ++i) {
            if (i == col || m.at(i, col).is_zero()) continue;
            FieldElement q = m.at(i, col);
            for (size_t j = 0; j < n + w; ++j) m.at(i, j) = m.at(i, j) - q * m.at(col, j);
        }
    }
    KMatrix x(a.field(), n, w);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < w; ++j) x.at(i, j) = m.at(i, n + j);
    return x;
}

KMatrix saturate_columns(const KMatrix& w, std::vector<size_t>* pivot_rows) {
    const FieldConfig f = w.field();
    const size_t rows = w.rows(), cols = w.cols();
    KMatrix m = w;
    std::vector<bool> row_used(rows, false);
    std::vector<size_t> pivot_row(cols, 0);
    for (size_t j = 0; j < cols; ++j) {
        // min-valuation entry among unused rows
        bool found = false;
        Val best = Val::inf();
        size_t pr = 0;
        for (size_t i = 0; i < rows; ++i) {
            if (row_used[i] || m.at(i, j).is_zero()) continue;
            Val v = m.at(i, j).valuation();
            if (!found || v < best) { found = true; best = v; pr = i; }
        }
        if (!found) throw InvalidInput("saturate_columns: dependent columns");
        FieldElement inv = m.at(pr, j).inverse();
        for (size_t i = 0; i < rows; ++i) m.at(i, j) = m.at(i, j) * inv;
        for (size_t jj = 0; jj < cols; ++jj) {
            if (jj == j || m.at(pr, jj).is_zero()) continue;
            FieldElement q = m.at(pr, jj);
            for (size_t i = 0; i < rows; ++i) m.at(i, jj) = m.at(i, jj) - q * m.at(i, j);
        }
        row_used[pr] = true;
        pivot_row[j] = pr;
    }
    if (pivot_rows) *pivot_rows = pivot_row;
    return m;
}

KMatrix solve_in_span(const KMatrix& w, const KMatrix& b) {
    if (w.rows() != b.rows()) throw InvalidInput("solve_in_span shape mismatch");
    const FieldConfig f = w.field();
    const size_t rows = w.rows(), s = w.cols(), nb = b.cols();
    KMatrix m = w.augment(b);
    std::vector<long> pivot_col_row(s, -1);
    size_t rr = 0;
    for (size_t j = 0; j < s; ++j) {
        size_t piv = rows;
        for (size_t i = rr; i < rows; ++i)
            if (!m.at(i, j).is_zero()) { piv = i; break; }
        if (piv == rows) throw ArithmeticError("solve_in_span: dependent columns");
        if (piv != rr)
            for (size_t jj = 0; jj < s + nb; ++jj) std::swap(m.at(rr, jj), m.at(piv, jj));
        FieldElement inv = m.at(rr, j).inverse();
        for (size_t jj = 0; jj < s + nb; ++jj) m.at(rr, jj) = m.at(rr, jj) * inv;
        for (size_t i = 0; i < rows; ++i) {
            if (i == rr || m.at(i, j).is_zero()) continue;
            FieldElement q = m.at(i, j);
            for (size_t jj = 0; jj < s + nb; ++jj) m.at(i, jj) = m.at(i, jj) - q * m.at(rr, jj);
        }
        pivot_col_row[j] = static_cast<long>(rr);
        ++rr;
    }
    // consistency: rows below rr must vanish on the b side
    for (size_t i = rr; i < rows; ++i)
        for (size_t j = 0; j < nb; ++j)
            if (!m.at(i, s + j).is_zero())
                throw ArithmeticError("solve_in_span: column outside span");
    KMatrix x(f, s, nb);
    for (size_t j = 0; j < s; ++j)
        for (size_t jb = 0; jb < nb; ++jb)
            x.at(j, jb) = m.at(static_cast<size_t>(pivot_col_row[j]), s + jb);
    return x;
}

KMatrix module_column_basis(const KMatrix& a) {
    const FieldConfig f = a.field();
    const size_t rows = a.rows(), cols = a.cols();
    KMatrix m = a;
    for (size_t i = 0; i < rows; ++i)
        for (size_t j = 0; j < cols; ++j)
            if (!m.at(i, j).is_zero() && !m.at(i, j).in_ring())
                throw InvalidInput("module_column_basis: entries must lie in O");
    std::vector<bool> row_used(rows, false), col_done(cols, false);
    std::vector<size_t> chosen;
    while (true) {
        bool found = false;
        Val best = Val::inf();
        size_t pi = 0, pj = 0;
        for (size_t i = 0; i < rows; ++i) {
            if (row_used[i]) continue;
            for (size_t j = 0; j < cols; ++j) {
                if (col_done[j] || m.at(i, j).is_zero()) continue;
                Val v = m.at(i, j).valuation();
                if (!found || v < best) { found = true; best = v; pi = i; pj = j; }
            }
        }
        if (!found) break;
        const FieldElement piv = m.at(pi, pj);
        for (size_t j = 0; j < cols; ++j) {
            if (j == pj || col_done[j] || m.at(pi, j).is_zero()) continue;
            FieldElement q = m.at(pi, j) / piv; // in O by minimality
            for (size_t i = 0; i < rows; ++i) m.at(i, j) = m.at(i, j) - q * m.at(i, pj);
        }
        row_used[pi] = true;
        col_done[pj] = true;
        chosen.push_back(pj);
    }
    std::vector<std::vector<FieldElement>> basis;
    for (size_t j : chosen) basis.push_back(m.column(j));
    return KMatrix::from_columns(f, rows, basis);
}

} // namespace hn
