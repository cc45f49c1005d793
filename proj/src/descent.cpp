#include "hn/descent.hpp"

#include <algorithm>
#include <sstream>

namespace hn {

namespace {

Int p_power(const Int& p, long e) {
    Int r;
    mpz_pow_ui(r.get_mpz_t(), p.get_mpz_t(), static_cast<unsigned long>(e));
    return r;
}

KMatrix z_to_k_descent(FieldConfig f, const ZMatrix& z) {
    KMatrix m(f, z.rows(), z.cols());
    for (size_t i = 0; i < z.rows(); ++i)
        for (size_t j = 0; j < z.cols(); ++j)
            m.at(i, j) = FieldElement::from_rat(f, Rat(z.at(i, j)));
    return m;
}

struct Level1Scan {
    Rat mu_max;
    Subgroup cran;
    bool semistable = false;
};

// First cran of X[p] by direct subspace enumeration (M = (Z/p)^n).
Level1Scan level1_scan(const IntegralHTModule& x) {
    const size_t n = static_cast<size_t>(x.n);
    TorsionHTModule xp = truncate(x, 1);
    std::vector<int> type(n, 1);
    Level1Scan out;
    bool found = false;
    Rat best_ht(-1);
    for (const auto& basis : fp_subspace_bases(x.field.p, n)) {
        if (basis.empty()) continue;
        Subgroup s = Subgroup::from_generators(x.field.p, type, basis);
        auto [ht, deg] = closure_ht_deg(xp, s);
        Rat mu = deg / ht;
        if (!found || mu > out.mu_max || (mu == out.mu_max && ht > best_ht)) {
            found = true;
            out.mu_max = mu;
            out.cran = s;
            best_ht = ht;
        }
    }
    if (!found) throw InvalidInput("level1_scan: zero module");
    out.semistable = (out.mu_max == metrics_rational(x).mu);
    return out;
}

// The elementary quotient Q/G as an F_p-basis of coset representatives.
std::vector<std::vector<Int>> quotient_fp_basis(const Subgroup& g, const Subgroup& q, long p) {
    std::vector<std::vector<Int>> basis;
    const size_t s = g.ambient_rank();
    const std::vector<int>& type = g.ambient_type();
    Int pe = p_power(Int(p), type.empty() ? 1 : type[0]);
    auto reduces_into_g = [&](const std::vector<Int>& v) {
        // try all F_p-combinations of the current basis
        size_t t = basis.size();
        std::vector<long> combo(t, 0);
        while (true) {
            std::vector<Int> w = v;
            for (size_t i = 0; i < t; ++i)
                for (size_t j = 0; j < s; ++j) w[j] += Int(combo[i]) * basis[i][j];
            bool inside = g.contains_element(w);
            if (inside) return true;
            size_t pos = 0;
            while (pos < t) {
                if (++combo[pos] < p) break;
                combo[pos] = 0;
                ++pos;
            }
            if (pos == t) break;
        }
        return false;
    };
    for (const auto& gen : q.generators()) {
        if (!reduces_into_g(gen)) basis.push_back(gen);
    }
    return basis;
}

struct LevelScan {
    Subgroup cran;
    Rat mu;
    bool ok = false;
    std::string note;
};

// First cran of X[p^m] searched between lift(G_{m-1}) and its p-preimage.
LevelScan level_scan(const IntegralHTModule& x, int m, const Subgroup& prev, const Rat& mu_max) {
    LevelScan out;
    TorsionHTModule xm = truncate(x, m);
    Subgroup g = prev.lift_level();
    Subgroup window = g.p_preimage_in_ambient();
    auto basis = quotient_fp_basis(g, window, x.field.p);
    const size_t q = basis.size();
    const size_t s = g.ambient_rank();
    bool found = false;
    Rat best_ht(-1);
    Subgroup best = g;
    for (const auto& coeffs : fp_subspace_bases(x.field.p, q)) {
        Subgroup h = g;
        if (!coeffs.empty()) {
            std::vector<std::vector<Int>> gens;
            for (const auto& c : coeffs) {
                std::vector<Int> v(s, Int(0));
                for (size_t i = 0; i < q; ++i)
                    for (size_t j = 0; j < s; ++j) v[j] += c[i] * basis[i][j];
                gens.push_back(std::move(v));
            }
            h = g.join(Subgroup::from_generators(x.field.p, g.ambient_type(), gens));
        }
        if (h.is_zero()) continue;
        auto [ht, deg] = closure_ht_deg(xm, h);
        Rat mu = deg / ht;
        if (mu != mu_max) continue;
        if (!found || Rat(ht) > best_ht) {
            found = true;
            best = h;
            best_ht = ht;
        }
    }
    if (!found) {
        out.note = "no subgroup of slope mu_max in the level-" + std::to_string(m) + " window";
        return out;
    }
    out.cran = best;
    out.mu = mu_max;
    out.ok = true;
    return out;
}

// p^k Λ_k as an integer lattice inside T, from the level-k cran.
ZMatrix scaled_lattice(const IntegralHTModule& x, const Subgroup& g, int k) {
    const size_t n = static_cast<size_t>(x.n);
    std::vector<std::vector<Int>> cols = g.generators();
    Int pk = p_power(Int(x.field.p), k);
    for (size_t j = 0; j < n; ++j) {
        std::vector<Int> c(n, Int(0));
        c[j] = pk;
        cols.push_back(std::move(c));
    }
    return ZMatrix::from_columns(n, cols);
}

// Nullspace basis of a rational matrix, as columns.
std::vector<std::vector<Rat>> rat_nullspace(const std::vector<std::vector<Rat>>& m, size_t cols) {
    const size_t rows = m.size();
    std::vector<std::vector<Rat>> a = m;
    std::vector<long> pivot_of_col(cols, -1);
    size_t rr = 0;
    for (size_t j = 0; j < cols && rr < rows; ++j) {
        size_t piv = rows;
        for (size_t i = rr; i < rows; ++i)
            if (a[i][j] != 0) { piv = i; break; }
        if (piv == rows) continue;
        std::swap(a[rr], a[piv]);
        Rat inv = Rat(1) / a[rr][j];
        for (size_t jj = 0; jj < cols; ++jj) a[rr][jj] *= inv;
        for (size_t i = 0; i < rows; ++i) {
            if (i == rr || a[i][j] == 0) continue;
            Rat f = a[i][j];
            for (size_t jj = 0; jj < cols; ++jj) a[i][jj] -= f * a[rr][jj];
        }
        pivot_of_col[j] = static_cast<long>(rr);
        ++rr;
    }
    std::vector<std::vector<Rat>> basis;
    for (size_t j = 0; j < cols; ++j) {
        if (pivot_of_col[j] >= 0) continue;
        std::vector<Rat> v(cols, Rat(0));
        v[j] = 1;
        for (size_t jj = 0; jj < cols; ++jj)
            if (pivot_of_col[jj] >= 0) v[jj] = -a[static_cast<size_t>(pivot_of_col[jj])][j];
        basis.push_back(std::move(v));
    }
    return basis;
}

// Saturated basis of the lattice spanned by rational vectors (first n_keep
// coordinates of each), inside Z^{n_keep}.
ZMatrix rational_span_to_saturated(const std::vector<std::vector<Rat>>& vecs, size_t n_keep) {
    if (vecs.empty()) return ZMatrix(n_keep, 0);
    std::vector<std::vector<Int>> cols;
    for (const auto& v : vecs) {
        Int l = 1;
        for (size_t i = 0; i < n_keep; ++i)
            mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), v[i].get_den().get_mpz_t());
        std::vector<Int> c(n_keep);
        for (size_t i = 0; i < n_keep; ++i) {
            Rat scaled = v[i] * Rat(l);
            c[i] = scaled.get_num();
        }
        cols.push_back(std::move(c));
    }
    return saturate_lattice(ZMatrix::from_columns(n_keep, cols));
}

// Solutions v in Q^n of alpha * v in span_K(w-columns), as a saturated
// lattice basis in T. With no w-columns this is the rational kernel of
// alpha: the lattice of the maximal slope-1 sub-module.
ZMatrix rational_alpha_preimage(const IntegralHTModule& x, const KMatrix& w) {
    const size_t n = static_cast<size_t>(x.n);
    const size_t r = x.alpha.rows();
    const int k = x.field.k;
    const size_t s = w.cols();
    if (r == 0) return ZMatrix::identity(n);
    // unknowns: v_0..v_{n-1} rational, then s K-coefficients with k rational
    // coordinates each; equations: the k coordinates of each of the r rows of
    // alpha*v - sum_l c_l w_l = 0
    const size_t ncols = n + s * static_cast<size_t>(k);
    std::vector<std::vector<Rat>> m(r * static_cast<size_t>(k),
                                    std::vector<Rat>(ncols, Rat(0)));
    for (size_t i = 0; i < r; ++i) {
        for (size_t j = 0; j < n; ++j) {
            const auto& coeffs = x.alpha.at(i, j).coeffs();
            for (int t = 0; t < k; ++t) m[i * k + t][j] = coeffs[static_cast<size_t>(t)];
        }
        for (size_t l = 0; l < s; ++l) {
            for (int a = 0; a < k; ++a) {
                FieldElement shifted = FieldElement::monomial(x.field, Rat(1), a) * w.at(i, l);
                const auto& coeffs = shifted.coeffs();
                for (int t = 0; t < k; ++t)
                    m[i * k + t][n + l * static_cast<size_t>(k) + static_cast<size_t>(a)] =
                        -coeffs[static_cast<size_t>(t)];
            }
        }
    }
    auto basis = rat_nullspace(m, ncols);
    return rational_span_to_saturated(basis, n);
}

ZMatrix rational_alpha_kernel(const IntegralHTModule& x) {
    return rational_alpha_preimage(x, KMatrix(x.field, x.alpha.rows(), 0));
}

// The smallest rational subspace U with U ⊗ K containing the given K-subspace:
// the span of the pi-power components of its vectors, saturated in T.
ZMatrix component_span(const FieldConfig& f, const KMatrix& w) {
    const size_t n = w.rows();
    std::vector<std::vector<Rat>> vecs;
    for (size_t j = 0; j < w.cols(); ++j) {
        for (int t = 0; t < f.k; ++t) {
            std::vector<Rat> v(n, Rat(0));
            bool nonzero = false;
            for (size_t i = 0; i < n; ++i) {
                v[i] = w.at(i, j).coeffs()[static_cast<size_t>(t)];
                if (v[i] != 0) nonzero = true;
            }
            if (nonzero) vecs.push_back(std::move(v));
        }
    }
    return rational_span_to_saturated(vecs, n);
}

// Verified p-divisible step from a candidate saturated sublattice.
bool try_pdivisible(const IntegralHTModule& x, const ZMatrix& a_basis, const Rat& mu_max,
                    long bound_exp, DescentStep& step) {
    if (a_basis.cols() == 0 || a_basis.cols() >= static_cast<size_t>(x.n)) return false;
    IntegralHTModule sub = sub_module(x, a_basis);
    if (metrics_rational(sub).mu != mu_max) return false;
    if (!(mu_max > metrics_rational(x).mu)) return false;
    if (!is_semistable(sub, bound_exp)) return false;
    step.kind = DescentStep::Kind::PDivisible;
    step.sub_basis = a_basis;
    step.sub = sub;
    step.quotient = quotient_module(x, a_basis).module;
    return true;
}

} // namespace

CranTower build_tower(const IntegralHTModule& x, int k_max, long bound_exp) {
    auto d = validate(x);
    if (!d.ok) throw InvalidInput("build_tower: module does not validate: " + d.issues[0]);
    if (x.n == 0) throw InvalidInput("build_tower: zero module");
    (void)bound_exp;
    CranTower tower;
    auto l1 = level1_scan(x);
    tower.levels.push_back({1, l1.cran, l1.cran.height(), l1.mu_max});
    for (int k = 2; k <= k_max; ++k) {
        const auto& prev = tower.levels.back();
        auto scan = level_scan(x, k, prev.g, l1.mu_max);
        if (!scan.ok) {
            tower.diagnostics.push_back(scan.note);
            break;
        }
        long a = scan.cran.height() - prev.g.height();
        if (a > prev.a)
            tower.diagnostics.push_back("a_k increased at level " + std::to_string(k));
        // cran compatibility: G_k[p^{k-1}] = G_{k-1}
        if (scan.cran.torsion_height(k - 1) != prev.g.height())
            tower.diagnostics.push_back("cran compatibility G_k[p^{k-1}] = G_{k-1} fails at level " +
                                        std::to_string(k));
        if (!scan.cran.contains(prev.g.lift_level()))
            tower.diagnostics.push_back("tower is not increasing at level " + std::to_string(k));
        tower.levels.push_back({k, scan.cran, a, scan.mu});
    }
    return tower;
}

DescentStep classify_tower(const CranTower& tower, const IntegralHTModule& x, long bound_exp) {
    DescentStep step;
    if (tower.levels.empty()) throw InvalidInput("classify_tower: empty tower");
    const auto& l1 = tower.levels.front();
    step.mu_max = l1.mu_max;
    if (l1.mu_max == metrics_rational(x).mu) {
        step.kind = DescentStep::Kind::AlreadySemistable;
        return step;
    }
    const auto& last = tower.levels.back();
    if (last.a == 0) {
        // a non-increasing integer sequence that reaches 0 stays 0: the limit
        // is the finite subgroup G_{k0}.
        step.kind = DescentStep::Kind::Isogeny;
        step.lattice = last.g;
        return step;
    }
    // slope-1 limits are exactly the rational kernel of alpha; when it is
    // nonzero the maximal slope-1 sub-module is the canonical candidate
    if (step.mu_max == 1) {
        ZMatrix ker = rational_alpha_kernel(x);
        if (try_pdivisible(x, ker, step.mu_max, bound_exp, step)) return step;
        // kernel empty: the limit is a finite group; only deepening helps
        step.kind = DescentStep::Kind::NeedsDeeperTower;
        step.note = "slope-1 limit with trivial rational kernel: finite case";
        return step;
    }
    if (tower.levels.size() >= 2) {
        const auto& prev = tower.levels[tower.levels.size() - 2];
        if (prev.a == last.a && last.a > 0) {
            // candidate: the stably-growing directions of the lattice chain,
            // saturated inside T
            long c = last.a;
            auto sd = smith_decompose(scaled_lattice(x, last.g, last.k));
            if (c < x.n) {
                ZMatrix a_basis(static_cast<size_t>(x.n), static_cast<size_t>(c));
                for (size_t i = 0; i < static_cast<size_t>(x.n); ++i)
                    for (long j = 0; j < c; ++j)
                        a_basis.at(i, static_cast<size_t>(j)) = sd.basis.at(i, static_cast<size_t>(j));
                if (try_pdivisible(x, a_basis, step.mu_max, bound_exp, step)) return step;
                // the cran contains the component span of its Fil^1 part; when
                // that part is all of ker(alpha) this candidate is exact
                ZMatrix comp = component_span(x.field, nullspace(x.alpha));
                if (try_pdivisible(x, comp, step.mu_max, bound_exp, step)) return step;
                // refinement: the first cran is the rational preimage of its
                // own image span; rebuild it from the low-valuation part of
                // the approximate candidate's image
                KMatrix img = x.alpha * z_to_k_descent(x.field, a_basis);
                if (rank(img) > 0) {
                    KMatrix w = module_column_basis(img);
                    Rat threshold(last.k, 2);
                    std::vector<std::vector<FieldElement>> keep;
                    for (size_t j = 0; j < w.cols(); ++j) {
                        Val best = Val::inf();
                        for (size_t i = 0; i < w.rows(); ++i) {
                            if (w.at(i, j).is_zero()) continue;
                            Val v = w.at(i, j).valuation();
                            if (v < best) best = v;
                        }
                        if (!best.infinite && best.v < threshold) keep.push_back(w.column(j));
                    }
                    KMatrix wkeep = KMatrix::from_columns(x.field, w.rows(), keep);
                    ZMatrix refined = rational_alpha_preimage(x, wkeep);
                    if (try_pdivisible(x, refined, step.mu_max, bound_exp, step)) return step;
                }
                step.note = "p-divisible candidate failed verification";
            } else {
                step.note = "p-divisible candidate would be the whole module";
            }
        }
    }
    step.kind = DescentStep::Kind::NeedsDeeperTower;
    return step;
}

namespace {

// F' = saturation of p^N B^{-1} F in the new frame after an isogeny with
// scaled basis B at level N.
ZMatrix transport_filtration(const ZMatrix& b, int level, const Int& p, const ZMatrix& f) {
    Int pn = p_power(p, level);
    ZMatrix scaled(f.rows(), f.cols());
    for (size_t i = 0; i < f.rows(); ++i)
        for (size_t j = 0; j < f.cols(); ++j) scaled.at(i, j) = f.at(i, j) * pn;
    ZMatrix w = solve_lower_triangular(b, scaled);
    return saturate_lattice(w);
}

} // namespace

DescentTrace run_descent(const IntegralHTModule& x, int horizon, long bound_exp) {
    auto diag = validate(x);
    if (!diag.ok) throw InvalidInput("run_descent: module does not validate: " + diag.issues[0]);
    DescentTrace trace;
    trace.final_module = x;
    if (x.n == 0) {
        trace.certified = true;
        return trace;
    }
    IntegralHTModule xg = x;                  // running module, isogenous to x
    std::vector<ZMatrix> filt;                // saturated nested lattices in xg's frame
    IntegralHTModule q = xg;                  // xg / filt.back()
    ZMatrix section = ZMatrix::identity(static_cast<size_t>(x.n));
    int outer = 0;

    auto recompute_quotient = [&]() {
        if (filt.empty()) {
            q = xg;
            section = ZMatrix::identity(static_cast<size_t>(xg.n));
        } else {
            auto qm = quotient_module(xg, filt.back());
            q = qm.module;
            section = qm.section;
        }
    };

    while (true) {
        if (q.n == 0) break;
        if (++outer > horizon) {
            trace.status = DescentTrace::Status::HorizonExhausted;
            trace.notes.push_back("outer step budget exhausted at horizon " +
                                  std::to_string(horizon));
            break;
        }
        auto l1 = level1_scan(q);
        trace.mu_sequence.push_back(l1.mu_max);
        Rat mu_q = metrics_rational(q).mu;
        if (l1.mu_max == mu_q) {
            StepRecord rec{DescentStep::Kind::AlreadySemistable, l1.mu_max, Subgroup(), ZMatrix(),
                           IntegralHTModule(), q};
            trace.steps.push_back(std::move(rec));
            trace.gradeds.push_back({q.n, mu_q});
            break;
        }
        int k = 2;
        bool stepped = false;
        while (!stepped) {
            if (k > horizon) {
                trace.status = DescentTrace::Status::HorizonExhausted;
                trace.notes.push_back("tower depth budget exhausted at horizon " +
                                      std::to_string(horizon));
                break;
            }
            CranTower tower = build_tower(q, k, bound_exp);
            if (!tower.compatible()) {
                trace.status = DescentTrace::Status::HorizonExhausted;
                for (const auto& d : tower.diagnostics) trace.notes.push_back(d);
                break;
            }
            DescentStep step = classify_tower(tower, q, bound_exp);
            if (step.kind == DescentStep::Kind::NeedsDeeperTower) {
                k *= 2;
                continue;
            }
            if (step.kind == DescentStep::Kind::Isogeny) {
                // lift Λ_Q to the global frame: preimage of Λ_Q under
                // p^{-N} T~ -> p^{-N} T_Q contains p^{-N} F and T~
                const int level = step.lattice.ambient_type().empty()
                                      ? 1
                                      : step.lattice.ambient_type()[0];
                std::vector<std::vector<Int>> gens;
                for (const auto& g : step.lattice.generators()) {
                    std::vector<Int> v(static_cast<size_t>(xg.n), Int(0));
                    for (size_t i = 0; i < static_cast<size_t>(xg.n); ++i)
                        for (size_t j = 0; j < static_cast<size_t>(q.n); ++j)
                            v[i] += section.at(i, j) * g[j];
                    gens.push_back(std::move(v));
                }
                if (!filt.empty()) {
                    const ZMatrix& f = filt.back();
                    for (size_t j = 0; j < f.cols(); ++j) gens.push_back(f.column(j));
                }
                Subgroup lam = Subgroup::from_generators(
                    xg.field.p, std::vector<int>(static_cast<size_t>(xg.n), level), gens);
                auto iso = apply_isogeny_full(xg, lam);
                if (iso.identity) {
                    trace.status = DescentTrace::Status::HorizonExhausted;
                    trace.notes.push_back("isogeny step produced the identity lattice");
                    break;
                }
                StepRecord rec{DescentStep::Kind::Isogeny, step.mu_max, step.lattice, ZMatrix(),
                               IntegralHTModule(), q};
                trace.steps.push_back(std::move(rec));
                std::vector<ZMatrix> filt2;
                for (const auto& f : filt)
                    filt2.push_back(transport_filtration(iso.basis, iso.level, Int(xg.field.p), f));
                xg = iso.module;
                filt = std::move(filt2);
                recompute_quotient();
                // the quotient by the full finite limit strictly lowers mu_max
                if (q.n > 0) {
                    auto l1b = level1_scan(q);
                    if (!(l1b.mu_max < step.mu_max))
                        trace.notes.push_back("mu_max did not decrease after an isogeny step");
                }
                stepped = true;
            } else if (step.kind == DescentStep::Kind::PDivisible) {
                StepRecord rec{DescentStep::Kind::PDivisible, step.mu_max, Subgroup(),
                               step.sub_basis, step.sub, q};
                trace.steps.push_back(std::move(rec));
                trace.gradeds.push_back({step.sub.n, step.mu_max});
                // new filtration stage: preimage of A in the global frame
                ZMatrix lifted(static_cast<size_t>(xg.n),
                               (filt.empty() ? 0 : filt.back().cols()) + step.sub_basis.cols());
                size_t col = 0;
                if (!filt.empty())
                    for (size_t j = 0; j < filt.back().cols(); ++j, ++col)
                        for (size_t i = 0; i < static_cast<size_t>(xg.n); ++i)
                            lifted.at(i, col) = filt.back().at(i, j);
                for (size_t j = 0; j < step.sub_basis.cols(); ++j, ++col)
                    for (size_t i = 0; i < static_cast<size_t>(xg.n); ++i) {
                        Int acc = 0;
                        for (size_t t = 0; t < static_cast<size_t>(q.n); ++t)
                            acc += section.at(i, t) * step.sub_basis.at(t, j);
                        lifted.at(i, col) = acc;
                    }
                filt.push_back(saturate_lattice(lifted));
                recompute_quotient();
                stepped = true;
            } else { // AlreadySemistable inside the tower loop cannot happen here
                trace.notes.push_back("unexpected classification");
                trace.status = DescentTrace::Status::HorizonExhausted;
                break;
            }
        }
        if (trace.status == DescentTrace::Status::HorizonExhausted) break;
    }

    trace.final_module = xg;
    trace.filtration = filt;
    if (trace.status != DescentTrace::Status::Done) return trace;

    // assemble the renormalized polygon from the filtration slopes/heights
    bool decreasing = true;
    for (size_t i = 1; i < trace.gradeds.size(); ++i)
        if (!(trace.gradeds[i].slope < trace.gradeds[i - 1].slope)) decreasing = false;
    if (!decreasing) {
        trace.notes.push_back("assembled filtration slopes are not strictly decreasing");
        return trace;
    }
    std::vector<std::pair<Rat, Rat>> entries;
    for (const auto& g : trace.gradeds) entries.emplace_back(g.slope, Rat(g.rank));
    trace.hn = entries.empty() ? ConcavePolygon::zero()
                               : ConcavePolygon::from_slopes(SlopeMultiset::make(entries));

    // non-renormalized polygon: isogeny kernels up to the first p-divisible
    // (or terminal) stage, then the tail of slope mu_infty
    std::vector<std::pair<Rat, Rat>> finite;
    Rat tail = 0;
    for (const auto& s : trace.steps) {
        if (s.kind == DescentStep::Kind::Isogeny) {
            finite.emplace_back(s.mu_max, Rat(s.lattice.height()));
        } else {
            tail = s.mu_max;
            break;
        }
    }
    trace.hn_nr = HalfLinePolygon::make(
        finite.empty() ? ConcavePolygon::zero()
                       : ConcavePolygon::from_slopes(SlopeMultiset::make(finite)),
        tail);
    trace.mu_infty = tail;

    // certification
    bool cert = true;
    long n_exp = xg.n;
    ConcavePolygon hn_p = hn_polygon_torsion(truncate(xg, 1), std::max(bound_exp, n_exp));
    if (hn_p != trace.hn) {
        cert = false;
        trace.notes.push_back("HN(final[p]) differs from the assembled polygon");
    }
    // verify each graded piece is semistable with the recorded slope
    for (size_t j = 0; j < trace.filtration.size() + 1 && cert; ++j) {
        IntegralHTModule piece = xg;
        if (j < trace.filtration.size()) piece = sub_module(xg, trace.filtration[j]);
        if (j > 0) {
            const ZMatrix& inner = trace.filtration[j - 1];
            const ZMatrix outer_basis =
                j < trace.filtration.size() ? trace.filtration[j] : ZMatrix::identity(xg.n);
            ZMatrix coords = z_coordinates_in(outer_basis, inner);
            piece = quotient_module(piece, coords).module;
        }
        if (piece.n == 0) continue;
        if (j >= trace.gradeds.size()) break;
        if (metrics_rational(piece).mu != trace.gradeds[j].slope ||
            piece.n != trace.gradeds[j].rank || !is_semistable(piece, bound_exp)) {
            cert = false;
            trace.notes.push_back("graded piece " + std::to_string(j) +
                                  " fails its semistability certificate");
        }
    }
    trace.certified = cert;
    return trace;
}

ConcavePolygon hn_renormalized(const IntegralHTModule& x, int horizon, long bound_exp) {
    auto trace = run_descent(x, horizon, bound_exp);
    if (trace.status != DescentTrace::Status::Done) {
        std::string msg = "descent horizon exhausted";
        for (const auto& n : trace.notes) msg += "; " + n;
        throw ResourceError(msg);
    }
    return trace.hn;
}

HalfLinePolygon hn_nonrenormalized(const IntegralHTModule& x, int horizon, long bound_exp) {
    auto trace = run_descent(x, horizon, bound_exp);
    if (trace.status != DescentTrace::Status::Done)
        throw ResourceError("descent horizon exhausted");
    return trace.hn_nr;
}

bool is_type_hn(const IntegralHTModule& x, int horizon, long bound_exp) {
    if (x.n == 0) return true;
    ConcavePolygon level1 = hn_polygon_torsion(truncate(x, 1), std::max(bound_exp, (long)x.n));
    return level1 == hn_renormalized(x, horizon, bound_exp);
}

ConvergenceReport empirical_convergence(const IntegralHTModule& x, int n_max, int horizon,
                                        long bound_exp) {
    ConvergenceReport rep;
    if (n_max <= 0 || x.n == 0) return rep;
    rep.hn = hn_renormalized(x, horizon, bound_exp);
    for (int n = 1; n <= n_max; ++n) {
        ConcavePolygon pn = hn_polygon_torsion(truncate(x, n), bound_exp);
        ConvergenceRow row;
        row.n = n;
        row.rescaled = rescale_polygon(pn, n);
        auto cmp = dominates(row.rescaled, rep.hn);
        row.geq_hn = (cmp == Dominance::Geq || cmp == Dominance::Equal);
        if (!row.geq_hn) rep.all_geq = false;
        rep.rows.push_back(std::move(row));
    }
    for (int n = 1; 2 * n <= n_max; ++n) {
        auto cmp = dominates(rep.rows[2 * n - 1].rescaled, rep.rows[n - 1].rescaled);
        if (!(cmp == Dominance::Leq || cmp == Dominance::Equal)) rep.chains_non_increasing = false;
    }
    return rep;
}

} // namespace hn
