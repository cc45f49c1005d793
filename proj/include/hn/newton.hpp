#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hn/polygon.hpp"

namespace hn {

/// Slope decomposition of a special fiber at the combinatorial level: simple
/// components (d_i, h_i), gcd(d_i, h_i) = 1, slope d_i/h_i in [0, 1].
struct SlopeData {
    std::vector<std::pair<long, long>> components; // (dim, height) per component

    static SlopeData make(std::vector<std::pair<long, long>> components);
    long total_height() const;
    long total_dim() const;
    /// All slopes equal.
    bool isoclinic() const;
};

/// Breakpoints of the convex Newton polygon (slopes sorted increasing),
/// from (0,0) to (ht, dim).
std::vector<ConcavePolygon::Point> newton_convex_points(const SlopeData& d);

/// Newt^◇(x) = dim - Newt(ht - x): the concave flip, same slope multiset
/// sorted decreasing.
ConcavePolygon newt_flip(const SlopeData& d);

/// Slope 1 on [0, dim], 0 on [dim, ht]: the maximal concave polygon from
/// (0,0) to (ht, dim).
ConcavePolygon hodge_flip(long dim, long ht);

struct NewtonCheckReport {
    bool hodge_ok = false;               // hn <= Hodge flip
    bool newton_checked = false;         // a slope claim was supplied
    bool newton_ok = false;              // hn <= Newt flip
    bool equality_with_newton = false;
    bool isoclinic = false;
    bool isoclinic_line_ok = false;      // isoclinic claim forces hn == the line
    std::string witness;                 // abscissa of a violated inequality
    bool passed() const {
        if (!hodge_ok) return false;
        if (newton_checked && !newton_ok) return false;
        if (isoclinic && !isoclinic_line_ok) return false;
        return true;
    }
};

/// Verifies hn <= hodge_flip and, when slope data is supplied, hn <= newt_flip
/// (with the isoclinic specialization: equality with the straight line).
/// A violated inequality is reported, never thrown.
NewtonCheckReport check_bounds(const ConcavePolygon& hn, const std::optional<SlopeData>& d,
                               long dim, long ht);

} // namespace hn
