#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <vector>

#include "hn/errors.hpp"

namespace hn {

/// Exact rational number. Every coordinate in the library is one of these;
/// no floating point crosses any interface.
using Rat = mpq_class;
using Int = mpz_class;

inline Rat rat(long num, long den = 1) {
    if (den == 0) throw ArithmeticError("rational with zero denominator");
    Rat q(num, den);
    q.canonicalize();
    return q;
}

/// Parses "num/den" or "num" (exact decimal integers only).
Rat rat_from_string(const std::string& s);

/// Canonical "num/den" string; integers print without the "/den".
std::string rat_to_string(const Rat& q);

bool is_integer(const Rat& q);

/// floor of a rational.
Int rat_floor(const Rat& q);

/// p-adic valuation of a nonzero integer.
long vp_int(const Int& z, const Int& p);

/// p-adic valuation of a nonzero rational.
long vp_rat(const Rat& q, const Int& p);

/// A value in Q ∪ {+infinity}; the valuation of 0 is +infinity.
struct Val {
    bool infinite = false;
    Rat v = 0;

    static Val inf() { return Val{true, Rat(0)}; }
    static Val of(const Rat& q) { return Val{false, q}; }

    bool operator==(const Val& o) const {
        if (infinite != o.infinite) return false;
        return infinite || v == o.v;
    }
    bool operator<(const Val& o) const {
        if (infinite) return false;
        if (o.infinite) return true;
        return v < o.v;
    }
    bool operator<=(const Val& o) const { return *this < o || *this == o; }
    bool operator>=(const Val& o) const { return !(*this < o); }
    bool operator>(const Val& o) const { return o < *this; }

    Val operator+(const Val& o) const {
        if (infinite || o.infinite) return inf();
        return of(v + o.v);
    }

    /// Finite value accessor; throws on +infinity.
    const Rat& finite() const {
        if (infinite) throw ArithmeticError("valuation is +infinity");
        return v;
    }

    std::string str() const { return infinite ? "inf" : rat_to_string(v); }
};

inline Val val_min(const Val& a, const Val& b) { return a < b ? a : b; }

} // namespace hn
