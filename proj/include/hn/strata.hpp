#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hn/descent.hpp"
#include "hn/newton.hpp"
#include "hn/polygon.hpp"

namespace hn {

/// A Harder-Narasimhan stratum label for GL_n: a weakly decreasing vector
/// nu in [0,1]^n whose associated concave polygon (0,0) -> (n,d) has integer
/// breakpoints.
struct StratumLabel {
    std::vector<Rat> nu;

    static StratumLabel make(std::vector<Rat> nu);
    static StratumLabel from_polygon(const ConcavePolygon& p);

    size_t n() const { return nu.size(); }
    Rat d() const;
    ConcavePolygon polygon() const;
    bool operator==(const StratumLabel& o) const { return nu == o.nu; }
    std::string str() const;
};

/// Levi/parabolic data of a label: block heights h_1 < ... < h_r = n, slopes
/// lambda_1 > ... > lambda_r, and the integral block omega-ranks
/// (h_i - h_{i-1})(1 - lambda_i).
struct LeviData {
    std::vector<long> heights;
    std::vector<Rat> slopes;
    std::vector<long> omega_ranks;

    StratumLabel reassemble() const;
};

/// Normalized Hecke double-coset label: weakly decreasing integers, min 0.
struct HeckeLabel {
    std::vector<long> a;

    static HeckeLabel make(std::vector<long> a); // normalizes by translation
    bool operator==(const HeckeLabel& o) const { return a == o.a; }
    /// The §8-style window a_1 - a_h > h.
    bool in_window() const;
};

/// All labels with terminal point (n, d), ordered by descending lexicographic
/// nu (a dominance-compatible linear extension: the maximum comes first).
std::vector<StratumLabel> enumerate_nu(long n, long d);

/// The straight line of slope d/n: the dominance minimum.
StratumLabel nu_ss(long n, long d);

Dominance dominance(const StratumLabel& a, const StratumLabel& b);

/// <mu - nu, 2rho> with mu = (1^d, 0^{n-d}) and 2rho = (n-1, n-3, ..., 1-n).
/// A non-negative integer for every enumerated label.
Rat stratum_dim(const StratumLabel& nu, long d);

LeviData levi_data(const StratumLabel& nu);

std::vector<HeckeLabel> hecke_labels(long h, long bound);

struct ClassifyResult {
    StratumLabel hn_label;
    std::optional<StratumLabel> newton_label;
    bool containment_ok = true; // HN stays below the Newton flip
    std::string witness;
};

/// Reads HN(X) as a stratum label; when a Newton claim is supplied, checks
/// the basic-inside-semistable containment direction. A violated containment
/// is reported in the result, never thrown.
ClassifyResult classify_module(const IntegralHTModule& x, const std::optional<SlopeData>& claimed,
                               int horizon = 32, long bound_exp = subgroup_enum_bound());

} // namespace hn
