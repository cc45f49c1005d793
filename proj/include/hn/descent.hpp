#pragma once

#include <string>
#include <vector>

#include "hn/htmod.hpp"
#include "hn/polygon.hpp"

namespace hn {

/// One level of the tower of first crans: G_k = first cran of X[p^k].
struct TowerLevel {
    int k = 0;
    Subgroup g;   // in p^{-k}T/T
    long a = 0;   // ht(G_k / G_{k-1})
    Rat mu_max;   // closure slope
};

struct CranTower {
    std::vector<TowerLevel> levels;
    std::vector<std::string> diagnostics; // compatibility violations; must stay empty
    bool compatible() const { return diagnostics.empty(); }
    long last_a() const { return levels.empty() ? -1 : levels.back().a; }
};

/// G_k for k = 1..k_max. Level 1 scans all of X[p]; deeper levels search only
/// between G_{k-1} and its p-preimage (the window the compatibility relations
/// confine the cran to), verifying every invariant as it goes.
CranTower build_tower(const IntegralHTModule& x, int k_max,
                      long bound_exp = subgroup_enum_bound());

/// Classification of the tower limit. NeedsDeeperTower is a recoverable
/// signal: the p-divisible candidate failed verification or the a_k sequence
/// has not yet repeated.
struct DescentStep {
    enum class Kind { AlreadySemistable, Isogeny, PDivisible, NeedsDeeperTower };
    Kind kind = Kind::NeedsDeeperTower;
    Rat mu_max;               // mu_max of the module the step acts on
    Subgroup lattice;         // Isogeny: the stabilized lattice Λ/T
    ZMatrix sub_basis;        // PDivisible: saturated basis of A's lattice
    IntegralHTModule sub;     // PDivisible: A, semistable of slope mu_max
    IntegralHTModule quotient; // PDivisible: X/A
    std::string note;
};

DescentStep classify_tower(const CranTower& tower, const IntegralHTModule& x,
                           long bound_exp = subgroup_enum_bound());

/// A recorded step of run_descent, with the module it acted on.
struct StepRecord {
    DescentStep::Kind kind;
    Rat mu_max;
    Subgroup lattice;        // isogeny payload (frame of module_before)
    ZMatrix sub_basis;       // p-divisible payload
    IntegralHTModule sub;
    IntegralHTModule module_before;
};

struct FiltrationStep {
    int rank = 0; // height of the graded piece
    Rat slope;
};

/// Full record of the descent. `final_module` is type-HN and isogenous to the
/// input; `filtration` holds the nested saturated sublattices of its HN
/// filtration in its own frame.
struct DescentTrace {
    enum class Status { Done, HorizonExhausted };
    Status status = Status::Done;
    std::vector<StepRecord> steps;
    std::vector<Rat> mu_sequence; // mu_max per outer step
    IntegralHTModule final_module;
    std::vector<ZMatrix> filtration;
    std::vector<FiltrationStep> gradeds; // strictly decreasing slopes
    ConcavePolygon hn = ConcavePolygon::zero();
    HalfLinePolygon hn_nr{ConcavePolygon::zero(), Rat(0)};
    Rat mu_infty = 0;
    bool certified = false; // HN(final[p]) == hn and gradeds verified
    std::vector<std::string> notes;
};

DescentTrace run_descent(const IntegralHTModule& x, int horizon = 32,
                         long bound_exp = subgroup_enum_bound());

/// The renormalized polygon read off the descent trace. Integer breakpoints.
ConcavePolygon hn_renormalized(const IntegralHTModule& x, int horizon = 32,
                               long bound_exp = subgroup_enum_bound());

/// Finite slopes from the isogeny kernels, tail slope mu_infty.
HalfLinePolygon hn_nonrenormalized(const IntegralHTModule& x, int horizon = 32,
                                   long bound_exp = subgroup_enum_bound());

/// HN(X[p]) == HN(X) as exact polygons.
bool is_type_hn(const IntegralHTModule& x, int horizon = 32,
                long bound_exp = subgroup_enum_bound());

struct ConvergenceRow {
    int n = 0;
    ConcavePolygon rescaled = ConcavePolygon::zero(); // x -> (1/n) HN(X[p^n])(n x)
    bool geq_hn = false;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    bool all_geq = true;              // rescaled >= HN(X) for every n
    bool chains_non_increasing = true; // along n -> 2n
    ConcavePolygon hn = ConcavePolygon::zero();
};

/// Tabulates (1/n) HN(X[p^n])(n ·) for n = 1..n_max against HN(X).
ConvergenceReport empirical_convergence(const IntegralHTModule& x, int n_max,
                                        int horizon = 32,
                                        long bound_exp = subgroup_enum_bound());

} // namespace hn
