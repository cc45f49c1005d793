#include "hn/strata.hpp"

#include <algorithm>
#include <sstream>

namespace hn {

StratumLabel StratumLabel::make(std::vector<Rat> nu) {
    for (size_t i = 0; i < nu.size(); ++i) {
        if (nu[i] < 0 || nu[i] > 1) throw InvalidInput("nu entries must lie in [0, 1]");
        if (i > 0 && nu[i] > nu[i - 1]) throw InvalidInput("nu must be weakly decreasing");
    }
    if (nu.empty()) throw InvalidInput("nu must be nonempty");
    StratumLabel l{std::move(nu)};
    if (!l.polygon().has_integer_breakpoints())
        throw InvalidInput("nu polygon must have integer breakpoints");
    return l;
}

StratumLabel StratumLabel::from_polygon(const ConcavePolygon& p) {
    if (!is_integer(p.domain_end())) throw InvalidInput("label polygon needs integer length");
    long n = p.domain_end().get_num().get_si();
    if (n <= 0) throw InvalidInput("label polygon needs positive length");
    std::vector<Rat> nu;
    for (long i = 1; i <= n; ++i) nu.push_back(p.eval(Rat(i)) - p.eval(Rat(i - 1)));
    return make(std::move(nu));
}

Rat StratumLabel::d() const {
    Rat s = 0;
    for (const auto& v : nu) s += v;
    return s;
}

ConcavePolygon StratumLabel::polygon() const {
    std::vector<ConcavePolygon::Point> pts{{Rat(0), Rat(0)}};
    Rat y = 0;
    for (size_t i = 0; i < nu.size(); ++i) {
        y += nu[i];
        pts.push_back({Rat(static_cast<long>(i) + 1), y});
    }
    return ConcavePolygon::from_breakpoints(std::move(pts));
}

std::string StratumLabel::str() const {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < nu.size(); ++i) os << (i ? "," : "") << rat_to_string(nu[i]);
    os << ")";
    return os.str();
}

StratumLabel LeviData::reassemble() const {
    std::vector<Rat> nu;
    long prev = 0;
    for (size_t i = 0; i < heights.size(); ++i) {
        for (long t = prev; t < heights[i]; ++t) nu.push_back(slopes[i]);
        prev = heights[i];
    }
    return StratumLabel::make(std::move(nu));
}

HeckeLabel HeckeLabel::make(std::vector<long> a) {
    if (a.empty()) throw InvalidInput("Hecke label must be nonempty");
    for (size_t i = 1; i < a.size(); ++i)
        if (a[i] > a[i - 1]) throw InvalidInput("Hecke label must be weakly decreasing");
    long m = a.back();
    for (auto& v : a) v -= m;
    return HeckeLabel{std::move(a)};
}

bool HeckeLabel::in_window() const {
    long h = static_cast<long>(a.size());
    return a.front() - a.back() > h;
}

namespace {

void enumerate_paths(long n, long d, ConcavePolygon::Point cur, std::optional<Rat> last_slope,
                     std::vector<ConcavePolygon::Point>& vertices,
                     std::vector<StratumLabel>& out) {
    if (cur.x == n) {
        if (cur.y != d) return;
        out.push_back(StratumLabel::from_polygon(ConcavePolygon::from_breakpoints(vertices)));
        return;
    }
    long x0 = cur.x.get_num().get_si();
    long y0 = cur.y.get_num().get_si();
    for (long x1 = x0 + 1; x1 <= n; ++x1) {
        for (long y1 = y0; y1 <= y0 + (x1 - x0); ++y1) {
            Rat slope = rat(y1 - y0, x1 - x0);
            if (last_slope && !(slope < *last_slope)) continue;
            // feasibility: the remaining straight run must not exceed the new
            // slope (concavity) and must fit in [0, 1]
            if (x1 < n) {
                Rat rest = rat(d - y1, n - x1);
                if (rest > slope || rest < 0 || rest > 1) continue;
            } else if (y1 != d) {
                continue;
            }
            vertices.push_back({Rat(x1), Rat(y1)});
            enumerate_paths(n, d, {Rat(x1), Rat(y1)}, slope, vertices, out);
            vertices.pop_back();
        }
    }
}

} // namespace

std::vector<StratumLabel> enumerate_nu(long n, long d) {
    if (n < 1 || d < 0 || d > n) throw InvalidInput("enumerate_nu needs 0 <= d <= n, n >= 1");
    std::vector<StratumLabel> out;
    std::vector<ConcavePolygon::Point> vertices{{Rat(0), Rat(0)}};
    enumerate_paths(n, d, {Rat(0), Rat(0)}, std::nullopt, vertices, out);
    std::sort(out.begin(), out.end(),
              [](const StratumLabel& a, const StratumLabel& b) { return b.nu < a.nu; });
    return out;
}

StratumLabel nu_ss(long n, long d) {
    if (n < 1 || d < 0 || d > n) throw InvalidInput("nu_ss needs 0 <= d <= n, n >= 1");
    return StratumLabel::make(std::vector<Rat>(static_cast<size_t>(n), rat(d, n)));
}

Dominance dominance(const StratumLabel& a, const StratumLabel& b) {
    if (a.n() != b.n() || a.d() != b.d())
        throw InvalidInput("dominance needs labels with matching (n, d)");
    return dominates(a.polygon(), b.polygon());
}

Rat stratum_dim(const StratumLabel& nu, long d) {
    const long n = static_cast<long>(nu.n());
    if (d < 0 || d > n || nu.d() != d) throw InvalidInput("stratum_dim: (n, d) mismatch");
    Rat total = 0;
    for (long j = 1; j <= n; ++j) {
        Rat mu_j = j <= d ? Rat(1) : Rat(0);
        total += (mu_j - nu.nu[static_cast<size_t>(j - 1)]) * Rat(n + 1 - 2 * j);
    }
    if (total < 0 || !is_integer(total))
        throw ArithmeticError("stratum_dim produced a non-integral or negative value");
    return total;
}

LeviData levi_data(const StratumLabel& nu) {
    LeviData out;
    const long n = static_cast<long>(nu.n());
    long i = 0;
    while (i < n) {
        long j = i;
        while (j < n && nu.nu[static_cast<size_t>(j)] == nu.nu[static_cast<size_t>(i)]) ++j;
        out.heights.push_back(j);
        out.slopes.push_back(nu.nu[static_cast<size_t>(i)]);
        Rat rank = Rat(j - i) * (Rat(1) - nu.nu[static_cast<size_t>(i)]);
        if (!is_integer(rank))
            throw InvalidInput("levi_data: block omega-rank is not integral");
        out.omega_ranks.push_back(rank.get_num().get_si());
        i = j;
    }
    return out;
}

namespace {

void hecke_rec(long h, long bound, long pos, std::vector<long>& cur,
               std::vector<HeckeLabel>& out) {
    if (pos == h) {
        if (cur.back() == 0) out.push_back(HeckeLabel{cur});
        return;
    }
    long hi = pos == 0 ? bound : cur[static_cast<size_t>(pos - 1)];
    for (long v = hi; v >= 0; --v) {
        cur[static_cast<size_t>(pos)] = v;
        hecke_rec(h, bound, pos + 1, cur, out);
    }
}

} // namespace

std::vector<HeckeLabel> hecke_labels(long h, long bound) {
    if (h < 1) throw InvalidInput("hecke_labels needs h >= 1");
    if (bound < 0) throw InvalidInput("hecke_labels needs bound >= 0");
    std::vector<HeckeLabel> out;
    std::vector<long> cur(static_cast<size_t>(h), 0);
    hecke_rec(h, bound, 0, cur, out);
    std::sort(out.begin(), out.end(),
              [](const HeckeLabel& a, const HeckeLabel& b) { return a.a < b.a; });
    return out;
}

ClassifyResult classify_module(const IntegralHTModule& x, const std::optional<SlopeData>& claimed,
                               int horizon, long bound_exp) {
    ClassifyResult res;
    ConcavePolygon hn = hn_renormalized(x, horizon, bound_exp);
    res.hn_label = StratumLabel::from_polygon(hn);
    if (claimed) {
        if (claimed->total_height() != x.n || Rat(claimed->total_dim()) != Rat(x.n - x.r()))
            throw InvalidInput("classify_module: slope data totals do not match the module");
        ConcavePolygon flip = newt_flip(*claimed);
        res.newton_label = StratumLabel::from_polygon(flip);
        auto cmp = dominates(hn, flip);
        res.containment_ok = (cmp == Dominance::Leq || cmp == Dominance::Equal);
        if (!res.containment_ok)
            res.witness = "HN label " + res.hn_label.str() + " is not below the Newton label " +
                          res.newton_label->str();
    }
    return res;
}

} // namespace hn
