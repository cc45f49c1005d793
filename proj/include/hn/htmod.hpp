#pragma once

#include <string>
#include <vector>

#include "hn/polygon.hpp"
#include "hn/valring.hpp"
#include "hn/zlattice.hpp"

namespace hn {

/// Default cap on subgroup enumeration: |M| <= p^bound. Overridable per call
/// and via the CLI (HN_ENUM_BOUND).
long subgroup_enum_bound();
void set_subgroup_enum_bound(long exp);

/// A subgroup of M = ⊕_j Z/p^{e_j} (e_1 >= e_2 >= ... >= 1), in canonical
/// Howell form under the embedding a_j -> p^{e_1 - e_j} a_j into (Z/p^{e_1})^s.
/// Also represents lattices T ⊆ Λ ⊆ p^{-N}T through Λ/T inside p^{-N}T/T.
class Subgroup {
public:
    Subgroup() = default;

    static Subgroup zero(long p, std::vector<int> ambient_type);
    static Subgroup full(long p, std::vector<int> ambient_type);
    /// Generators in M-coordinates: integer vectors (a_1, ..., a_s), a_j read
    /// mod p^{e_j}.
    static Subgroup from_generators(long p, std::vector<int> ambient_type,
                                    const std::vector<std::vector<Int>>& gens);

    long p() const { return p_; }
    const std::vector<int>& ambient_type() const { return type_; }
    size_t ambient_rank() const { return type_.size(); }
    /// log_p of the order.
    long height() const { return howell_.height(); }
    bool is_zero() const { return howell_.is_zero(); }
    bool is_full() const;

    bool contains(const Subgroup& other) const;
    bool contains_element(const std::vector<Int>& m_coords) const;
    Subgroup join(const Subgroup& other) const;
    Subgroup join_element(const std::vector<Int>& m_coords) const;
    /// log_p |S[p^t]|.
    long torsion_height(long t) const;
    /// The subgroup {x in M : p x in S} (requires homogeneous ambient).
    Subgroup p_preimage_in_ambient() const;
    /// Re-embeds a subgroup of (Z/p^m)^n into (Z/p^{m+1})^n via class
    /// multiplication by p (the inclusion p^{-m}T/T ⊆ p^{-(m+1)}T/T).
    Subgroup lift_level() const;

    /// Canonical generator columns in M-coordinates.
    std::vector<std::vector<Int>> generators() const;

    /// Cyclic decomposition: orders p^{f_l} (f weakly decreasing, all >= 1)
    /// with independent generators realizing it, in M-coordinates.
    struct AdaptedBasis {
        std::vector<int> type;
        std::vector<std::vector<Int>> gens;
    };
    AdaptedBasis adapted_basis() const;

    bool operator==(const Subgroup& o) const;
    bool operator!=(const Subgroup& o) const { return !(*this == o); }
    std::string key() const { return howell_.key(); }

    const HowellForm& howell() const { return howell_; }

private:
    long p_ = 2;
    std::vector<int> type_;
    HowellForm howell_;
    std::vector<Int> embed(const std::vector<Int>& m_coords) const;
};

struct Diagnostics {
    bool ok = true;
    std::vector<std::string> issues;
    void fail(std::string msg) {
        ok = false;
        issues.push_back(std::move(msg));
    }
};

/// Torsion Hodge-Tate module (M, ω, α): M a finite abelian p-group by cyclic
/// type, ω a torsion O-module by elementary divisors, α given on the
/// generators of M with entries read modulo the annihilators of ω.
struct TorsionHTModule {
    FieldConfig field;
    std::vector<int> cyclic_type; // e_1 >= ... >= e_s >= 1
    TorsionModule omega;          // divisors aligned with alpha rows
    KMatrix alpha;                // (#divisors) x s

    static TorsionHTModule make(FieldConfig field, std::vector<int> cyclic_type,
                                std::vector<Rat> omega_divisors, KMatrix alpha);
    static TorsionHTModule zero(FieldConfig field);

    size_t rank() const { return cyclic_type.size(); }
    long height() const;
    bool is_zero() const { return cyclic_type.empty(); }
};

/// Integral Hodge-Tate module (T, ω, α): T the standard rank-n lattice, ω
/// free of rank r, α an r x n matrix over O with some r x r minor a unit.
struct IntegralHTModule {
    FieldConfig field;
    int n = 0;
    KMatrix alpha; // r x n

    static IntegralHTModule make(FieldConfig field, int n, KMatrix alpha);
    int r() const { return static_cast<int>(alpha.rows()); }
};

/// Two-step filtered vector space: deg = dim Fil^1, rg = dim V.
struct FilteredSpace {
    int dim_v = 0;
    KMatrix fil1_basis; // dim_v x deg columns over K
    int deg() const { return static_cast<int>(fil1_basis.cols()); }
    int rg() const { return dim_v; }
    Rat mu() const { return Rat(deg(), rg()); }
};

struct TorsionMetrics {
    Rat deg, ht, mu;
};
struct RationalMetrics {
    Rat dim, ht, mu;
};

Diagnostics validate(const TorsionHTModule& x);
Diagnostics validate(const IntegralHTModule& x);

TorsionMetrics metrics(const TorsionHTModule& x);
RationalMetrics metrics_rational(const IntegralHTModule& x);

/// X[p^m] = (p^{-m}T/T, p^{-m}ω/ω, α).
TorsionHTModule truncate(const IntegralHTModule& x, int m);

/// (ht, deg) of the schematic closure of the subgroup, without materializing
/// the closure triple.
std::pair<Rat, Rat> closure_ht_deg(const TorsionHTModule& x, const Subgroup& s);

/// The sub-triple (M', O·α(M'), α|_{M'}).
TorsionHTModule schematic_closure(const TorsionHTModule& x, const Subgroup& s);

/// The quotient triple (M/M', ω/O·α(M'), ᾱ).
TorsionHTModule quotient_torsion(const TorsionHTModule& x, const Subgroup& s);

/// All subgroups of M, canonical forms, deterministic order (by height then
/// canonical key). |M| must stay within p^bound_exp.
std::vector<Subgroup> enumerate_subgroups(long p, const std::vector<int>& type,
                                          long bound_exp = subgroup_enum_bound());

/// All subspaces of F_p^q as reduced-echelon bases (row vectors over F_p).
/// Cheap direct enumeration used for one-p-level searches.
std::vector<std::vector<std::vector<Int>>> fp_subspace_bases(long p, size_t q);

/// Concave envelope of the closure points {(ht, deg)}.
ConcavePolygon hn_polygon_torsion(const TorsionHTModule& x,
                                  long bound_exp = subgroup_enum_bound());

/// The unique subgroup whose closure attains (mu_max, maximal height).
Subgroup first_cran(const TorsionHTModule& x, long bound_exp = subgroup_enum_bound());

Rat mu_max_torsion(const TorsionHTModule& x, long bound_exp = subgroup_enum_bound());

bool is_semistable(const TorsionHTModule& x, long bound_exp = subgroup_enum_bound());
/// An integral module is semistable iff X[p] is.
bool is_semistable(const IntegralHTModule& x, long bound_exp = subgroup_enum_bound());

/// Quotient by the finite subgroup Λ/T ⊆ p^{-N}T/T: the new module has
/// lattice Λ (Hermite-normal basis), ω replaced by O·α(Λ) re-freed, α
/// rewritten in the new bases. Λ = T returns the module unchanged.
IntegralHTModule apply_isogeny(const IntegralHTModule& x, const Subgroup& lambda);

/// Same, also reporting the change of lattice: Λ = p^{-level} * basis * Z^n in
/// the old coordinates (basis is the p^level-scaled Hermite basis).
struct IsogenyResult {
    IntegralHTModule module;
    ZMatrix basis;
    int level = 0;
    bool identity = false;
};
IsogenyResult apply_isogeny_full(const IntegralHTModule& x, const Subgroup& lambda);

TorsionHTModule direct_sum(const TorsionHTModule& x, const TorsionHTModule& y);
IntegralHTModule direct_sum(const IntegralHTModule& x, const IntegralHTModule& y);

/// Fil^1 = ker(α ⊗ K); deg = dim(X), rg = ht(X).
FilteredSpace to_filtered_space(const IntegralHTModule& x);

/// Sub-module on a saturated sublattice (columns of sat_basis): the triple
/// (F, O·α(F) re-freed, α restricted).
IntegralHTModule sub_module(const IntegralHTModule& x, const ZMatrix& sat_basis);

/// Quotient by the sub-module on a saturated sublattice; ω is re-freed via
/// saturation so the quotient stays in the integral category (an isogeny
/// class invariant). Also returns the complement section used for lifting.
struct QuotientModule {
    IntegralHTModule module;
    ZMatrix section; // n x (n-c): basis of a complement in the original frame
};
QuotientModule quotient_module(const IntegralHTModule& x, const ZMatrix& sat_basis);

} // namespace hn
