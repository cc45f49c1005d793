#pragma once

#include <string>
#include <vector>

#include "hn/rational.hpp"

namespace hn {

/// Dense integer matrix, column-oriented use (columns generate lattices or
/// subgroups).
class ZMatrix {
public:
    ZMatrix() = default;
    ZMatrix(size_t rows, size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, Int(0)) {}

    static ZMatrix identity(size_t n);
    static ZMatrix from_columns(size_t rows, const std::vector<std::vector<Int>>& cols);

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    Int& at(size_t i, size_t j) { return data_[i * cols_ + j]; }
    const Int& at(size_t i, size_t j) const { return data_[i * cols_ + j]; }

    std::vector<Int> column(size_t j) const;
    ZMatrix augment(const ZMatrix& o) const;
    ZMatrix operator*(const ZMatrix& o) const;
    bool operator==(const ZMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }
    std::string str() const;

private:
    size_t rows_ = 0, cols_ = 0;
    std::vector<Int> data_;
};

/// Column-style Hermite normal form of the lattice generated by the columns.
/// Returns a matrix whose nonzero columns are the canonical basis (pivots
/// positive, entries right of... pivots reduced). Zero columns are dropped.
ZMatrix hermite_normal_form(const ZMatrix& gens);

/// Smith normal form d_1 | d_2 | ... with unimodular U tracked so that the
/// lattice L spanned by the input columns satisfies L = sum_i d_i * Z * u_i,
/// where u_i are the columns of `basis` (a basis of Z^rows). Divisors are
/// returned for all rows; rows beyond the rank get divisor 0.
struct SmithDecomposition {
    std::vector<Int> divisors; // size = rows, ascending by divisibility, 0 = free
    ZMatrix basis;             // rows x rows unimodular
};
SmithDecomposition smith_decompose(const ZMatrix& gens);

/// Saturation of the column span inside Z^rows: the unique saturated sublattice
/// with the same Q-span, returned as a basis matrix (rows x rank).
ZMatrix saturate_lattice(const ZMatrix& gens);

/// Solves b * x = rhs for a square lower-triangular b with nonzero diagonal;
/// every division must be exact (ArithmeticError otherwise).
ZMatrix solve_lower_triangular(const ZMatrix& b, const ZMatrix& rhs);

/// Coordinates of the columns of `vecs` in the column basis `basis` (full
/// column rank); entries must come out integral.
ZMatrix z_coordinates_in(const ZMatrix& basis, const ZMatrix& vecs);

/// Subgroup of (Z/p^e)^s in canonical Howell form. Columns are the canonical
/// generators; equal subgroups have identical forms.
class HowellForm {
public:
    HowellForm() = default;
    /// Reduces arbitrary generator columns (taken mod p^e).
    HowellForm(Int p, int e, size_t s, const ZMatrix& gens);

    const ZMatrix& matrix() const { return m_; }
    const Int& modulus() const { return modulus_; } // p^e
    int exponent() const { return e_; }
    size_t ambient_rank() const { return s_; }

    /// log_p of the subgroup order.
    long height() const;
    bool is_zero() const { return m_.cols() == 0; }
    bool contains(const std::vector<Int>& x) const;
    bool contains(const HowellForm& other) const;
    HowellForm join(const HowellForm& other) const;
    HowellForm join_element(const std::vector<Int>& x) const;
    /// Image under multiplication by p^t.
    HowellForm p_multiple(long t) const;
    /// {x : p x in this}.
    HowellForm p_preimage() const;

    bool operator==(const HowellForm& o) const;
    std::string key() const; // canonical string, usable as map key

private:
    Int p_ = 2;
    int e_ = 1;
    size_t s_ = 0;
    Int modulus_ = 2;
    ZMatrix m_; // canonical columns
    std::vector<long> pivot_val_; // valuation of pivot per column
    std::vector<size_t> pivot_row_;
    void reduce(ZMatrix gens);
};

} // namespace hn
