#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hn/rational.hpp"

namespace hn {

/// The base field K = Q(p^{1/k}); value group (1/k)Z, normalized v(p) = 1.
/// A genuine subfield of C_p; every valuation computed here agrees with
/// the value over any larger valued extension.
struct FieldConfig {
    long p = 2;
    int k = 1;

    static FieldConfig make(long p, int k);
    bool operator==(const FieldConfig& o) const { return p == o.p && k == o.k; }
    bool operator!=(const FieldConfig& o) const { return !(*this == o); }
    Int pz() const { return Int(p); }
};

/// Guard on rational coefficient bit-size; exceeded => ResourceError rather
/// than silent degradation. Configurable (CLI: HN_BITS_GUARD).
size_t bits_guard();
void set_bits_guard(size_t bits);

/// Element sum_{i<k} c_i pi^i of K, pi = p^{1/k}. The valuation of a nonzero
/// element is the minimum of vp(c_i) + i/k over nonzero terms, attained by a
/// unique term because the summands' valuations are distinct mod 1.
class FieldElement {
public:
    FieldElement() = default;
    FieldElement(FieldConfig f, std::vector<Rat> coeffs);

    static FieldElement zero(FieldConfig f);
    static FieldElement one(FieldConfig f);
    static FieldElement from_rat(FieldConfig f, const Rat& q);
    /// coeff * pi^i, 0 <= i < k.
    static FieldElement monomial(FieldConfig f, const Rat& coeff, int i);
    /// pi^j for any j in Z (negative allowed).
    static FieldElement pi_pow(FieldConfig f, long j);

    const FieldConfig& field() const { return field_; }
    const std::vector<Rat>& coeffs() const { return coeffs_; }

    bool is_zero() const;
    Val valuation() const;
    bool in_ring() const { return valuation() >= Val::of(Rat(0)); }
    bool is_unit() const { return !is_zero() && valuation() == Val::of(Rat(0)); }

    FieldElement operator-() const;
    FieldElement operator+(const FieldElement& o) const;
    FieldElement operator-(const FieldElement& o) const;
    FieldElement operator*(const FieldElement& o) const;
    /// Exact division; zero divisor is an arithmetic error.
    FieldElement operator/(const FieldElement& o) const;
    FieldElement inverse() const;

    FieldElement scale(const Rat& q) const;
    /// Multiplication by p^e, e in Z.
    FieldElement times_p_pow(long e) const;

    bool operator==(const FieldElement& o) const;
    bool operator!=(const FieldElement& o) const { return !(*this == o); }

    /// Image under K_{p,k} -> K_{p,km}, pi -> pi'^m. Valuations are preserved;
    /// this is the base-change used to test field-independence.
    FieldElement embed(int m) const;

    std::string str() const;

private:
    void check_guard() const;
    FieldConfig field_;
    std::vector<Rat> coeffs_;
};

/// Dense matrix over K. Rows x cols, row-major.
class KMatrix {
public:
    KMatrix() = default;
    KMatrix(FieldConfig f, size_t rows, size_t cols);

    static KMatrix identity(FieldConfig f, size_t n);
    static KMatrix from_columns(FieldConfig f, size_t rows,
                                const std::vector<std::vector<FieldElement>>& cols);

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    const FieldConfig& field() const { return field_; }

    FieldElement& at(size_t i, size_t j) { return data_[i * cols_ + j]; }
    const FieldElement& at(size_t i, size_t j) const { return data_[i * cols_ + j]; }

    std::vector<FieldElement> column(size_t j) const;
    KMatrix transpose() const;
    KMatrix operator*(const KMatrix& o) const;
    KMatrix augment(const KMatrix& o) const; // side-by-side

    bool operator==(const KMatrix& o) const;

private:
    FieldConfig field_;
    size_t rows_ = 0, cols_ = 0;
    std::vector<FieldElement> data_;
};

/// Finitely presented torsion module over O, by elementary divisors
/// (valuations of the pi-power annihilators), each > 0.
struct TorsionModule {
    std::vector<Rat> divisors; // all > 0, in (1/k)Z; order preserved

    static TorsionModule make(FieldConfig f, std::vector<Rat> divisors);
    Rat degree() const;
    bool is_zero() const { return divisors.empty(); }
};

/// Valuations d_1 <= d_2 <= ... of a diagonal form of A reached by unimodular
/// row/column operations over O. Entries must lie in O.
std::vector<Rat> elementary_divisors(const KMatrix& a);

/// Same reduction, also returning the accumulated left transform L with
/// L * A * R = diag, so cokernel coordinates are x -> L x. Requires the
/// cokernel to be torsion (the reduction must produce rows() pivots).
struct DiagonalForm {
    std::vector<Rat> divisors; // one per row, ascending, may include zeros
    KMatrix left;              // rows x rows, unimodular over O
};
DiagonalForm diagonalize_full_rank(const KMatrix& a);

/// deg of the submodule N of omega generated by the columns: deg(omega) -
/// deg(omega/N), with omega/N presented by the generator columns augmented
/// with the diagonal relation columns of the ambient divisors.
Rat fitting_degree(const KMatrix& generators, const TorsionModule& ambient);

/// Basis of the kernel of a over K, as columns. Deterministic.
KMatrix nullspace(const KMatrix& a);

/// Solves a * x = b for square invertible a (columns of b independently).
KMatrix solve_linear(const KMatrix& a, const KMatrix& b);

/// Given columns spanning a K-subspace W, returns columns forming an O-basis
/// of the saturation W ∩ O^rows (unit pivots in distinct rows). Columns must
/// be K-independent. The pivot rows can be reported through `pivot_rows`.
KMatrix saturate_columns(const KMatrix& w, std::vector<size_t>* pivot_rows = nullptr);

/// Solves w * x = b where the columns of w are K-independent and every column
/// of b lies in their span; throws ArithmeticError otherwise.
KMatrix solve_in_span(const KMatrix& w, const KMatrix& b);

/// Columns generate an O-submodule of O^rows of full K-rank r = rank; returns
/// r columns forming an O-basis of that module (unimodular column reduction,
/// deterministic min-valuation pivoting).
KMatrix module_column_basis(const KMatrix& a);

/// Rank over K.
size_t rank(const KMatrix& a);

} // namespace hn
