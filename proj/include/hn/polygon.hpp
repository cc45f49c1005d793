#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hn/rational.hpp"

namespace hn {

struct SlopeMultiset;

/// A concave piecewise-linear function on [0, domain_end] with rational
/// breakpoints, first breakpoint exactly (0,0). The stored representation is
/// canonical: x strictly increasing, segment slopes strictly decreasing, no
/// collinear interior breakpoints. Equality of polygons is structural
/// equality of canonical forms.
class ConcavePolygon {
public:
    struct Point {
        Rat x, y;
        bool operator==(const Point& o) const { return x == o.x && y == o.y; }
    };

    /// Canonicalizes (merges collinear segments) and checks the invariants.
    static ConcavePolygon from_breakpoints(std::vector<Point> pts);
    static ConcavePolygon from_slopes(const SlopeMultiset& slopes);
    /// The polygon on [0,0]; neutral element of the tropical convolution.
    static ConcavePolygon zero();

    const std::vector<Point>& breakpoints() const { return pts_; }
    const Rat& domain_end() const { return pts_.back().x; }
    const Rat& terminal_value() const { return pts_.back().y; }
    bool is_degenerate() const { return pts_.size() == 1; }

    /// Linear interpolation; x outside [0, domain_end] is a domain error.
    Rat eval(const Rat& x) const;

    SlopeMultiset to_slopes() const;

    bool operator==(const ConcavePolygon& o) const { return pts_ == o.pts_; }
    bool operator!=(const ConcavePolygon& o) const { return !(*this == o); }

    /// True when every breakpoint has integer coordinates.
    bool has_integer_breakpoints() const;

    std::string str() const;

private:
    ConcavePolygon() = default;
    std::vector<Point> pts_;
};

/// Slopes with multiplicities, strictly decreasing; in bijection with
/// ConcavePolygon by cumulative summation.
struct SlopeMultiset {
    std::vector<std::pair<Rat, Rat>> entries; // (slope, multiplicity > 0)

    static SlopeMultiset make(std::vector<std::pair<Rat, Rat>> e);
};

/// A concave function on [0, +inf): finite polygon plus a tail slope on
/// [domain_end, +inf) with tail_slope <= last finite slope.
struct HalfLinePolygon {
    ConcavePolygon finite_part;
    Rat tail_slope;

    static HalfLinePolygon make(ConcavePolygon finite, Rat tail);
    Rat eval(const Rat& x) const;
    bool operator==(const HalfLinePolygon& o) const {
        return finite_part == o.finite_part && tail_slope == o.tail_slope;
    }
};

/// (f ⊗ g)(x) = sup_{a+b=x} f(a) + g(b); for concave polygons this is the
/// merge of their slope multisets by decreasing slope.
ConcavePolygon tropical_convolve(const ConcavePolygon& f, const ConcavePolygon& g);

/// sup_{x in [0,h]} (f(x) - lambda*x); attained at a breakpoint.
Rat legendre_transform(const ConcavePolygon& f, const Rat& lambda);

/// x -> P(ht - x) - dim + x. Requires domain_end == ht and P(ht) == dim.
ConcavePolygon dual_polygon(const ConcavePolygon& p, const Rat& ht, const Rat& dim);

/// Least concave majorant of a point set containing (0,0).
ConcavePolygon concave_envelope(const std::vector<ConcavePolygon::Point>& points);

enum class Dominance { Leq, Geq, Equal, Incomparable };

std::string dominance_str(Dominance d);

/// Pointwise comparison of polygons with common endpoints.
Dominance dominates(const ConcavePolygon& p, const ConcavePolygon& q);

/// Report produced by renormalize_check. Never throws on a falsified
/// precondition; the diagnostics carry the finding instead.
struct RenormalizeReport {
    bool subadditive = true;             // phi_{n+m} <= phi_n ⊗ phi_m on all pairs
    bool divisor_chains_ok = true;       // inequality (1) on all pairs (k, kn)
    std::vector<std::string> diagnostics;
    std::vector<ConcavePolygon> rescaled; // x -> (1/n) phi_n(n x), n = 1..N
    ConcavePolygon pointwise_min = ConcavePolygon::zero();
};

/// phi[i] is the polygon indexed by n = i+1, with domain [0, (i+1)h].
RenormalizeReport renormalize_check(const std::vector<ConcavePolygon>& phi, const Rat& h);

/// Rescales x -> (1/n) P(n x).
ConcavePolygon rescale_polygon(const ConcavePolygon& p, long n);

/// Exact pointwise minimum of concave polygons on a common domain.
ConcavePolygon pointwise_min(const std::vector<ConcavePolygon>& ps);

} // namespace hn
