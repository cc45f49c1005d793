#pragma once

// The worked rank-2 example family over Q(2^{1/2}), used across the test
// suites. All four validate; their HN data is known in closed form.

#include "hn/htmod.hpp"

namespace hn::testing {

inline FieldConfig field22() { return FieldConfig::make(2, 2); }

// alpha = (1, pi): semistable of slope 1/2.
inline IntegralHTModule make_x1() {
    auto f = field22();
    KMatrix a(f, 1, 2);
    a.at(0, 0) = FieldElement::one(f);
    a.at(0, 1) = FieldElement::monomial(f, Rat(1), 1);
    return IntegralHTModule::make(f, 2, std::move(a));
}

// alpha = (1, p*pi): destabilized X1; X2[p] has a slope-1 line but HN(X2) is
// the line to (2,1). One isogeny step with lattice T + <p^{-1}e2> lands on a
// semistable module.
inline IntegralHTModule make_x2() {
    auto f = field22();
    KMatrix a(f, 1, 2);
    a.at(0, 0) = FieldElement::one(f);
    a.at(0, 1) = FieldElement::monomial(f, Rat(2), 1);
    return IntegralHTModule::make(f, 2, std::move(a));
}

// alpha = (0, 1): split etale x multiplicative shape, HN slopes {(1,1),(0,1)}.
inline IntegralHTModule make_x3() {
    auto f = field22();
    KMatrix a(f, 1, 2);
    a.at(0, 1) = FieldElement::one(f);
    return IntegralHTModule::make(f, 2, std::move(a));
}

// alpha = (p, 1): the kernel line (1, -p) is killed exactly; the descent takes
// one p-divisible step. HN slopes {(1,1),(0,1)}.
inline IntegralHTModule make_x4() {
    auto f = field22();
    KMatrix a(f, 1, 2);
    a.at(0, 0) = FieldElement::from_rat(f, Rat(2));
    a.at(0, 1) = FieldElement::one(f);
    return IntegralHTModule::make(f, 2, std::move(a));
}

} // namespace hn::testing
