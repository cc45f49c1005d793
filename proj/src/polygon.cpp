#include "hn/polygon.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace hn {

namespace {

// Collapses collinear interior breakpoints; input must already be sorted with
// strictly increasing x.
std::vector<ConcavePolygon::Point> canonicalize(std::vector<ConcavePolygon::Point> pts) {
    if (pts.size() < 3) return pts;
    std::vector<ConcavePolygon::Point> out;
    out.push_back(pts[0]);
    for (size_t i = 1; i + 1 < pts.size(); ++i) {
        const auto& a = out.back();
        const auto& b = pts[i];
        const auto& c = pts[i + 1];
        // collinear iff (b-a) x (c-a) == 0
        Rat cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
        if (cross != 0) out.push_back(b);
    }
    out.push_back(pts.back());
    return out;
}

} // namespace

ConcavePolygon ConcavePolygon::from_breakpoints(std::vector<Point> pts) {
    if (pts.empty()) throw InvalidInput("polygon needs at least the origin");
    if (!(pts.front().x == 0 && pts.front().y == 0))
        throw InvalidInput("first breakpoint must be (0,0)");
    for (size_t i = 1; i < pts.size(); ++i) {
        if (!(pts[i - 1].x < pts[i].x))
            throw InvalidInput("breakpoint abscissae must be strictly increasing");
    }
    pts = canonicalize(std::move(pts));
    // concavity: slopes strictly decreasing
    for (size_t i = 2; i < pts.size(); ++i) {
        Rat s1 = (pts[i - 1].y - pts[i - 2].y) / (pts[i - 1].x - pts[i - 2].x);
        Rat s2 = (pts[i].y - pts[i - 1].y) / (pts[i].x - pts[i - 1].x);
        if (!(s2 < s1)) throw InvalidInput("breakpoints are not concave");
    }
    ConcavePolygon p;
    p.pts_ = std::move(pts);
    return p;
}

ConcavePolygon ConcavePolygon::from_slopes(const SlopeMultiset& slopes) {
    std::vector<Point> pts;
    pts.push_back({Rat(0), Rat(0)});
    Rat x = 0, y = 0;
    for (const auto& [s, m] : slopes.entries) {
        x += m;
        y += s * m;
        pts.push_back({x, y});
    }
    return from_breakpoints(std::move(pts));
}

ConcavePolygon ConcavePolygon::zero() {
    return from_breakpoints({{Rat(0), Rat(0)}});
}

Rat ConcavePolygon::eval(const Rat& x) const {
    if (x < 0 || x > domain_end()) throw DomainError("polygon evaluated outside [0, domain_end]");
    // find segment by binary search
    size_t lo = 0, hi = pts_.size() - 1;
    if (pts_.size() == 1) return pts_[0].y;
    while (hi - lo > 1) {
        size_t mid = (lo + hi) / 2;
        if (pts_[mid].x <= x) lo = mid; else hi = mid;
    }
    if (pts_[lo].x == x) return pts_[lo].y;
    const auto& a = pts_[lo];
    const auto& b = pts_[hi];
    return a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x);
}

SlopeMultiset ConcavePolygon::to_slopes() const {
    SlopeMultiset s;
    for (size_t i = 1; i < pts_.size(); ++i) {
        Rat m = pts_[i].x - pts_[i - 1].x;
        Rat sl = (pts_[i].y - pts_[i - 1].y) / m;
        s.entries.emplace_back(sl, m);
    }
    return s;
}

bool ConcavePolygon::has_integer_breakpoints() const {
    for (const auto& p : pts_)
        if (!is_integer(p.x) || !is_integer(p.y)) return false;
    return true;
}

std::string ConcavePolygon::str() const {
    std::ostringstream os;
    for (size_t i = 0; i < pts_.size(); ++i) {
        if (i) os << " ";
        os << "(" << rat_to_string(pts_[i].x) << "," << rat_to_string(pts_[i].y) << ")";
    }
    return os.str();
}

SlopeMultiset SlopeMultiset::make(std::vector<std::pair<Rat, Rat>> e) {
    for (size_t i = 0; i < e.size(); ++i) {
        if (!(e[i].second > 0)) throw InvalidInput("slope multiplicity must be > 0");
        if (i > 0 && !(e[i].first < e[i - 1].first))
            throw InvalidInput("slopes must be strictly decreasing");
    }
    SlopeMultiset s;
    s.entries = std::move(e);
    return s;
}

HalfLinePolygon HalfLinePolygon::make(ConcavePolygon finite, Rat tail) {
    auto slopes = finite.to_slopes();
    if (!slopes.entries.empty() && !(tail <= slopes.entries.back().first))
        throw InvalidInput("tail slope exceeds last finite slope");
    return HalfLinePolygon{std::move(finite), std::move(tail)};
}

Rat HalfLinePolygon::eval(const Rat& x) const {
    if (x < 0) throw DomainError("half-line polygon evaluated at negative x");
    const Rat& h = finite_part.domain_end();
    if (x <= h) return finite_part.eval(x);
    return finite_part.terminal_value() + tail_slope * (x - h);
}

ConcavePolygon tropical_convolve(const ConcavePolygon& f, const ConcavePolygon& g) {
    // Merge the slope multisets by decreasing slope; licensed for concave
    // polygons, where the sup is attained by concatenating segments.
    auto a = f.to_slopes().entries;
    auto b = g.to_slopes().entries;
    std::vector<std::pair<Rat, Rat>> merged;
    size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        bool take_a;
        if (i == a.size()) take_a = false;
        else if (j == b.size()) take_a = true;
        else take_a = !(a[i].first < b[j].first);
        auto& e = take_a ? a[i++] : b[j++];
        if (!merged.empty() && merged.back().first == e.first)
            merged.back().second += e.second;
        else
            merged.push_back(e);
    }
    return ConcavePolygon::from_slopes(SlopeMultiset::make(std::move(merged)));
}

Rat legendre_transform(const ConcavePolygon& f, const Rat& lambda) {
    // f concave piecewise-linear: the sup of f(x) - lambda x over [0,h] is
    // attained at a breakpoint.
    Rat best = f.breakpoints()[0].y; // x = 0 -> f(0) = 0
    for (const auto& p : f.breakpoints()) {
        Rat v = p.y - lambda * p.x;
        if (v > best) best = v;
    }
    return best;
}

ConcavePolygon dual_polygon(const ConcavePolygon& p, const Rat& ht, const Rat& dim) {
    if (p.domain_end() != ht || p.terminal_value() != dim)
        throw InvalidInput("dual_polygon: endpoint mismatch with (ht, dim)");
    std::vector<ConcavePolygon::Point> out;
    const auto& pts = p.breakpoints();
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
        Rat x = ht - it->x;
        out.push_back({x, it->y - dim + x});
    }
    return ConcavePolygon::from_breakpoints(std::move(out));
}

ConcavePolygon concave_envelope(const std::vector<ConcavePolygon::Point>& points) {
    if (points.empty()) throw InvalidInput("concave_envelope of empty set");
    bool has_origin = false;
    for (const auto& p : points) {
        if (p.x < 0) throw InvalidInput("concave_envelope: negative abscissa");
        if (p.x == 0 && p.y == 0) has_origin = true;
    }
    if (!has_origin) throw InvalidInput("concave_envelope: point set must contain (0,0)");

    // keep only the highest point at each x
    std::map<Rat, Rat> best;
    for (const auto& p : points) {
        auto it = best.find(p.x);
        if (it == best.end() || it->second < p.y) best[p.x] = p.y;
    }
    std::vector<ConcavePolygon::Point> sorted;
    sorted.reserve(best.size());
    for (auto& [x, y] : best) sorted.push_back({x, y});

    // upper hull, monotone chain
    std::vector<ConcavePolygon::Point> hull;
    for (const auto& p : sorted) {
        while (hull.size() >= 2) {
            const auto& a = hull[hull.size() - 2];
            const auto& b = hull[hull.size() - 1];
            Rat cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
            if (cross >= 0) hull.pop_back(); else break;
        }
        hull.push_back(p);
    }
    if (!(hull.front().x == 0 && hull.front().y == 0))
        throw InvalidInput("concave_envelope: a point at x=0 lies above the origin");
    return ConcavePolygon::from_breakpoints(std::move(hull));
}

std::string dominance_str(Dominance d) {
    switch (d) {
        case Dominance::Leq: return "leq";
        case Dominance::Geq: return "geq";
        case Dominance::Equal: return "equal";
        case Dominance::Incomparable: return "incomparable";
    }
    return "?";
}

Dominance dominates(const ConcavePolygon& p, const ConcavePolygon& q) {
    if (p.domain_end() != q.domain_end() || p.terminal_value() != q.terminal_value())
        throw InvalidInput("dominates: polygons must share both endpoints");
    std::set<Rat> xs;
    for (const auto& b : p.breakpoints()) xs.insert(b.x);
    for (const auto& b : q.breakpoints()) xs.insert(b.x);
    bool le = true, ge = true;
    for (const auto& x : xs) {
        Rat a = p.eval(x), b = q.eval(x);
        if (a < b) ge = false;
        if (a > b) le = false;
    }
    if (le && ge) return Dominance::Equal;
    if (le) return Dominance::Leq;
    if (ge) return Dominance::Geq;
    return Dominance::Incomparable;
}

ConcavePolygon rescale_polygon(const ConcavePolygon& p, long n) {
    if (n <= 0) throw InvalidInput("rescale_polygon: n must be positive");
    std::vector<ConcavePolygon::Point> pts;
    Rat inv = rat(1, n);
    for (const auto& b : p.breakpoints()) pts.push_back({b.x * inv, b.y * inv});
    return ConcavePolygon::from_breakpoints(std::move(pts));
}

ConcavePolygon pointwise_min(const std::vector<ConcavePolygon>& ps) {
    if (ps.empty()) throw InvalidInput("pointwise_min of empty family");
    for (const auto& p : ps) {
        if (p.domain_end() != ps[0].domain_end())
            throw InvalidInput("pointwise_min: mismatched domains");
    }
    // Candidate kink abscissae: all breakpoints plus pairwise segment
    // crossings. The min of concave functions is concave, so sampling there
    // reconstructs it exactly.
    std::set<Rat> xs;
    for (const auto& p : ps)
        for (const auto& b : p.breakpoints()) xs.insert(b.x);
    std::vector<Rat> grid(xs.begin(), xs.end());
    for (size_t i = 0; i < ps.size(); ++i) {
        for (size_t j = i + 1; j < ps.size(); ++j) {
            for (size_t t = 0; t + 1 < grid.size(); ++t) {
                const Rat& x0 = grid[t];
                const Rat& x1 = grid[t + 1];
                Rat f0 = ps[i].eval(x0) - ps[j].eval(x0);
                Rat f1 = ps[i].eval(x1) - ps[j].eval(x1);
                if ((f0 < 0 && f1 > 0) || (f0 > 0 && f1 < 0)) {
                    Rat xc = x0 + (x1 - x0) * (-f0) / (f1 - f0);
                    xs.insert(xc);
                }
            }
        }
    }
    std::vector<ConcavePolygon::Point> pts;
    for (const auto& x : xs) {
        Rat m = ps[0].eval(x);
        for (size_t i = 1; i < ps.size(); ++i) {
            Rat v = ps[i].eval(x);
            if (v < m) m = v;
        }
        pts.push_back({x, m});
    }
    return ConcavePolygon::from_breakpoints(std::move(pts));
}

RenormalizeReport renormalize_check(const std::vector<ConcavePolygon>& phi, const Rat& h) {
    RenormalizeReport rep;
    const size_t N = phi.size();
    for (size_t i = 0; i < N; ++i) {
        long n = static_cast<long>(i) + 1;
        if (phi[i].domain_end() != Rat(n) * h) {
            rep.subadditive = false;
            rep.diagnostics.push_back("phi_" + std::to_string(n) + " does not live on [0, " +
                                      std::to_string(n) + "h]");
            return rep;
        }
    }
    // subadditivity phi_{n+m} <= phi_n ⊗ phi_m, checked at breakpoint unions
    for (size_t n = 1; n <= N; ++n) {
        for (size_t m = n; n + m <= N; ++m) {
            ConcavePolygon conv = tropical_convolve(phi[n - 1], phi[m - 1]);
            const ConcavePolygon& target = phi[n + m - 1];
            std::set<Rat> xs;
            for (const auto& b : conv.breakpoints()) xs.insert(b.x);
            for (const auto& b : target.breakpoints()) xs.insert(b.x);
            for (const auto& x : xs) {
                if (target.eval(x) > conv.eval(x)) {
                    rep.subadditive = false;
                    rep.diagnostics.push_back(
                        "subadditivity fails: phi_" + std::to_string(n + m) + "(" +
                        rat_to_string(x) + ") > (phi_" + std::to_string(n) + " conv phi_" +
                        std::to_string(m) + ")(" + rat_to_string(x) + ")");
                }
            }
        }
    }
    for (size_t i = 0; i < N; ++i)
        rep.rescaled.push_back(rescale_polygon(phi[i], static_cast<long>(i) + 1));
    if (!rep.rescaled.empty()) rep.pointwise_min = pointwise_min(rep.rescaled);

    // inequality (1): (1/(kn)) phi_{kn}(kn x) <= (1/k) phi_k(k x) on divisor pairs
    for (size_t k = 1; k <= N; ++k) {
        for (size_t kn = 2 * k; kn <= N; kn += k) {
            const auto& lo = rep.rescaled[kn - 1];
            const auto& hi = rep.rescaled[k - 1];
            std::set<Rat> xs;
            for (const auto& b : lo.breakpoints()) xs.insert(b.x);
            for (const auto& b : hi.breakpoints()) xs.insert(b.x);
            for (const auto& x : xs) {
                if (lo.eval(x) > hi.eval(x)) {
                    rep.divisor_chains_ok = false;
                    rep.diagnostics.push_back("inequality (1) fails at k=" + std::to_string(k) +
                                              ", kn=" + std::to_string(kn) + ", x=" +
                                              rat_to_string(x));
                }
            }
        }
    }
    return rep;
}

} // namespace hn
