#pragma once

// Test-only oracles and random generators. These stay independent of the
// implementation paths they check: the convolution oracle evaluates the sup
// definition directly, never the slope merge.

#include <random>
#include <set>
#include <vector>

#include "hn/htmod.hpp"
#include "hn/polygon.hpp"

namespace hn::testing {

inline Rat random_rat(std::mt19937& rng, int num_lo = -9, int num_hi = 9, int den_hi = 9) {
    std::uniform_int_distribution<int> num(num_lo, num_hi);
    std::uniform_int_distribution<int> den(1, den_hi);
    return rat(num(rng), den(rng));
}

inline ConcavePolygon random_polygon(std::mt19937& rng, int max_segments = 4) {
    std::uniform_int_distribution<int> nseg(0, max_segments);
    int n = nseg(rng);
    std::set<Rat> slopes;
    while (static_cast<int>(slopes.size()) < n) slopes.insert(random_rat(rng));
    std::vector<std::pair<Rat, Rat>> entries;
    for (auto it = slopes.rbegin(); it != slopes.rend(); ++it) {
        std::uniform_int_distribution<int> mn(1, 6);
        std::uniform_int_distribution<int> md(1, 4);
        entries.emplace_back(*it, rat(mn(rng), md(rng)));
    }
    return ConcavePolygon::from_slopes(SlopeMultiset::make(std::move(entries)));
}

/// Direct sup definition of (f ⊗ g)(x). For fixed x, a -> f(a) + g(x-a) is
/// concave piecewise-linear in a with kinks exactly at the breakpoints of f
/// and at x minus the breakpoints of g, so evaluating there is exact.
inline Rat convolve_sup_at(const ConcavePolygon& f, const ConcavePolygon& g, const Rat& x) {
    const Rat& hf = f.domain_end();
    const Rat& hg = g.domain_end();
    std::set<Rat> cands;
    auto clamp_ok = [&](const Rat& a) { return a >= 0 && a <= hf && x - a >= 0 && x - a <= hg; };
    for (const auto& b : f.breakpoints()) cands.insert(b.x);
    for (const auto& b : g.breakpoints()) cands.insert(x - b.x);
    // interval ends of the feasible window
    cands.insert(x - hg > 0 ? x - hg : Rat(0));
    cands.insert(x < hf ? x : hf);
    bool first = true;
    Rat best = 0;
    for (const auto& a : cands) {
        if (!clamp_ok(a)) continue;
        Rat v = f.eval(a) + g.eval(x - a);
        if (first || v > best) { best = v; first = false; }
    }
    if (first) throw std::runtime_error("convolve_sup_at: empty feasible set");
    return best;
}

/// All x on the grid with spacing 1/lcm(denominators) inside [0, h].
inline std::vector<Rat> lcm_grid(const ConcavePolygon& f, const ConcavePolygon& g) {
    Int l = 1;
    auto absorb = [&](const ConcavePolygon& p) {
        for (const auto& b : p.breakpoints()) {
            mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), b.x.get_den().get_mpz_t());
            mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), b.y.get_den().get_mpz_t());
        }
    };
    absorb(f);
    absorb(g);
    Rat h = f.domain_end() + g.domain_end();
    std::vector<Rat> grid;
    Rat step = Rat(1) / Rat(l);
    for (Rat x = 0; x <= h; x += step) grid.push_back(x);
    return grid;
}

inline FieldElement random_o_element(std::mt19937& rng, FieldConfig f, int max_val = 3) {
    // p^a * (unit-ish integer combo), valuation <= max_val typically
    std::uniform_int_distribution<int> coeff(-4, 4);
    std::uniform_int_distribution<int> vd(0, max_val);
    std::vector<Rat> c(f.k, Rat(0));
    for (int i = 0; i < f.k; ++i) c[i] = Rat(coeff(rng));
    FieldElement e(f, std::move(c));
    if (e.is_zero()) e = FieldElement::one(f);
    long boost = vd(rng);
    e = e.times_p_pow(boost);
    // clamp: if valuation still exceeds max_val, fall back to a unit
    if (e.valuation() > Val::of(Rat(max_val))) e = FieldElement::one(f);
    return e;
}

/// Random valid integral module: alpha = U * [I_r | B] * column mix, U a
/// random unimodular-over-O square and B random entries of O.
inline IntegralHTModule random_integral_module(std::mt19937& rng, FieldConfig f, int n_max = 3,
                                               int max_val = 3) {
    std::uniform_int_distribution<int> nd(1, n_max);
    int n = nd(rng);
    std::uniform_int_distribution<int> rd(0, n);
    int r = rd(rng);
    KMatrix alpha(f, r, n);
    if (r > 0) {
        // start from [I_r | B]
        for (int i = 0; i < r; ++i) alpha.at(i, i) = FieldElement::one(f);
        for (int i = 0; i < r; ++i)
            for (int j = r; j < n; ++j) alpha.at(i, j) = random_o_element(rng, f, max_val);
        // random row operations over O (unimodular)
        std::uniform_int_distribution<int> rops(0, 2 * r);
        int ops = rops(rng);
        for (int t = 0; t < ops; ++t) {
            std::uniform_int_distribution<int> pick(0, r - 1);
            int a = pick(rng), b = pick(rng);
            if (a == b) continue;
            FieldElement c = random_o_element(rng, f, max_val);
            for (int j = 0; j < n; ++j)
                alpha.at(a, j) = alpha.at(a, j) + c * alpha.at(b, j);
        }
        // random integer column operations (lattice basis changes)
        std::uniform_int_distribution<int> cops(0, 2 * n);
        int ops2 = cops(rng);
        for (int t = 0; t < ops2; ++t) {
            std::uniform_int_distribution<int> pick(0, n - 1);
            std::uniform_int_distribution<int> small(-2, 2);
            int a = pick(rng), b = pick(rng);
            if (a == b) continue;
            Rat c(small(rng));
            for (int i = 0; i < r; ++i)
                alpha.at(i, a) = alpha.at(i, a) + alpha.at(i, b).scale(c);
        }
        // column swaps
        std::uniform_int_distribution<int> sw(0, n - 1);
        int a = sw(rng), b = sw(rng);
        if (a != b)
            for (int i = 0; i < r; ++i) std::swap(alpha.at(i, a), alpha.at(i, b));
    }
    return IntegralHTModule::make(f, n, std::move(alpha));
}

} // namespace hn::testing
