#include "hn/newton.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace hn {

SlopeData SlopeData::make(std::vector<std::pair<long, long>> components) {
    for (auto& [d, h] : components) {
        if (h < 1) throw InvalidInput("slope component height must be >= 1");
        if (d < 0 || d > h) throw InvalidInput("slope component must have slope in [0, 1]");
        if (std::gcd(d, h) != 1) throw InvalidInput("slope component (d, h) must be coprime");
    }
    if (components.empty()) throw InvalidInput("slope data needs at least one component");
    return SlopeData{std::move(components)};
}

long SlopeData::total_height() const {
    long h = 0;
    for (const auto& [dd, hh] : components) h += hh;
    return h;
}

long SlopeData::total_dim() const {
    long d = 0;
    for (const auto& [dd, hh] : components) d += dd;
    return d;
}

bool SlopeData::isoclinic() const {
    for (const auto& [d, h] : components)
        if (rat(d, h) != rat(components[0].first, components[0].second)) return false;
    return true;
}

namespace {

// slope multiset (slope, total height), given order
std::vector<std::pair<Rat, Rat>> slope_multiset(const SlopeData& d, bool increasing) {
    std::vector<std::pair<Rat, Rat>> entries;
    for (const auto& [dd, hh] : d.components) entries.emplace_back(rat(dd, hh), Rat(hh));
    std::sort(entries.begin(), entries.end(), [&](const auto& a, const auto& b) {
        return increasing ? a.first < b.first : a.first > b.first;
    });
    std::vector<std::pair<Rat, Rat>> merged;
    for (auto& e : entries) {
        if (!merged.empty() && merged.back().first == e.first)
            merged.back().second += e.second;
        else
            merged.push_back(e);
    }
    return merged;
}

} // namespace

std::vector<ConcavePolygon::Point> newton_convex_points(const SlopeData& d) {
    std::vector<ConcavePolygon::Point> pts{{Rat(0), Rat(0)}};
    Rat x = 0, y = 0;
    for (const auto& [s, m] : slope_multiset(d, true)) {
        x += m;
        y += s * m;
        pts.push_back({x, y});
    }
    return pts;
}

ConcavePolygon newt_flip(const SlopeData& d) {
    return ConcavePolygon::from_slopes(SlopeMultiset::make(slope_multiset(d, false)));
}

ConcavePolygon hodge_flip(long dim, long ht) {
    if (dim < 0 || dim > ht) throw InvalidInput("hodge_flip needs 0 <= dim <= ht");
    std::vector<std::pair<Rat, Rat>> entries;
    if (dim > 0) entries.emplace_back(Rat(1), Rat(dim));
    if (ht > dim) entries.emplace_back(Rat(0), Rat(ht - dim));
    if (entries.empty()) return ConcavePolygon::zero();
    return ConcavePolygon::from_slopes(SlopeMultiset::make(std::move(entries)));
}

NewtonCheckReport check_bounds(const ConcavePolygon& hn, const std::optional<SlopeData>& d,
                               long dim, long ht) {
    if (hn.domain_end() != Rat(ht) || hn.terminal_value() != Rat(dim))
        throw InvalidInput("check_bounds: polygon endpoints do not match (ht, dim)");
    if (d) {
        if (d->total_height() != ht || d->total_dim() != dim)
            throw InvalidInput("check_bounds: slope data totals do not match (ht, dim)");
    }
    NewtonCheckReport rep;
    auto cmp_hodge = dominates(hn, hodge_flip(dim, ht));
    rep.hodge_ok = (cmp_hodge == Dominance::Leq || cmp_hodge == Dominance::Equal);
    if (!rep.hodge_ok) rep.witness = "hn exceeds the Hodge flip";
    if (d) {
        rep.newton_checked = true;
        ConcavePolygon flip = newt_flip(*d);
        auto cmp = dominates(hn, flip);
        rep.newton_ok = (cmp == Dominance::Leq || cmp == Dominance::Equal);
        rep.equality_with_newton = (cmp == Dominance::Equal);
        if (!rep.newton_ok) {
            // name a witness abscissa
            std::set<Rat> xs;
            for (const auto& b : hn.breakpoints()) xs.insert(b.x);
            for (const auto& b : flip.breakpoints()) xs.insert(b.x);
            for (const auto& x : xs)
                if (hn.eval(x) > flip.eval(x)) {
                    rep.witness = "hn(" + rat_to_string(x) + ") = " + rat_to_string(hn.eval(x)) +
                                  " > Newt_flip(" + rat_to_string(x) + ") = " +
                                  rat_to_string(flip.eval(x));
                    break;
                }
        }
        rep.isoclinic = d->isoclinic();
        if (rep.isoclinic) {
            ConcavePolygon line = ConcavePolygon::from_breakpoints(
                {{Rat(0), Rat(0)}, {Rat(ht), Rat(dim)}});
            rep.isoclinic_line_ok = (hn == line);
            if (!rep.isoclinic_line_ok && rep.witness.empty())
                rep.witness = "isoclinic claim forces hn to be the straight line";
        }
    }
    return rep;
}

} // namespace hn
