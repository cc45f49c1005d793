#include "hn/svg.hpp"

#include <sstream>

namespace hn {

namespace {

// deterministic fixed-point decimal from an exact rational
std::string dec(const Rat& q, long scale) {
    Int num = q.get_num() * scale * 1000000;
    Int quo;
    mpz_tdiv_q(quo.get_mpz_t(), num.get_mpz_t(), q.get_den().get_mpz_t());
    bool neg = quo < 0;
    Int a = abs(quo);
    Int ip = a / 1000000, fp = a % 1000000;
    std::ostringstream os;
    if (neg) os << "-";
    os << ip.get_str();
    std::string frac = fp.get_str();
    frac.insert(frac.begin(), 6 - frac.size(), '0');
    while (!frac.empty() && frac.back() == '0') frac.pop_back();
    if (!frac.empty()) os << "." << frac;
    return os.str();
}

} // namespace

std::string polygon_svg(const ConcavePolygon& p) {
    const long scale = 60;
    const long margin = 40;
    Rat w = p.domain_end();
    Rat ymax = 0;
    for (const auto& b : p.breakpoints())
        if (b.y > ymax) ymax = b.y;
    if (ymax == 0) ymax = 1;
    long wpix = static_cast<long>(rat_floor(w).get_si()) * scale + 2 * margin + scale;
    long hpix = static_cast<long>(rat_floor(ymax).get_si()) * scale + 2 * margin + scale;
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << wpix << " " << hpix
       << "\">\n";
    auto px = [&](const Rat& x) { return dec(x + Rat(margin) / scale, scale); };
    auto py = [&](const Rat& y) { return dec(ymax - y + Rat(margin) / scale, scale); };
    // unit grid
    os << "  <g stroke=\"#ddd\" stroke-width=\"1\">\n";
    for (long gx = 0; Rat(gx) <= w; ++gx)
        os << "    <line x1=\"" << px(Rat(gx)) << "\" y1=\"" << py(Rat(0)) << "\" x2=\""
           << px(Rat(gx)) << "\" y2=\"" << py(ymax) << "\"/>\n";
    for (long gy = 0; Rat(gy) <= ymax; ++gy)
        os << "    <line x1=\"" << px(Rat(0)) << "\" y1=\"" << py(Rat(gy)) << "\" x2=\""
           << px(w) << "\" y2=\"" << py(Rat(gy)) << "\"/>\n";
    os << "  </g>\n";
    // axes
    os << "  <g stroke=\"#000\" stroke-width=\"2\">\n";
    os << "    <line x1=\"" << px(Rat(0)) << "\" y1=\"" << py(Rat(0)) << "\" x2=\"" << px(w)
       << "\" y2=\"" << py(Rat(0)) << "\"/>\n";
    os << "    <line x1=\"" << px(Rat(0)) << "\" y1=\"" << py(Rat(0)) << "\" x2=\""
       << px(Rat(0)) << "\" y2=\"" << py(ymax) << "\"/>\n";
    os << "  </g>\n";
    // polyline
    os << "  <polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"3\" points=\"";
    for (size_t i = 0; i < p.breakpoints().size(); ++i) {
        const auto& b = p.breakpoints()[i];
        os << (i ? " " : "") << px(b.x) << "," << py(b.y);
    }
    os << "\"/>\n";
    // breakpoint markers and rational labels
    for (const auto& b : p.breakpoints()) {
        os << "  <circle cx=\"" << px(b.x) << "\" cy=\"" << py(b.y)
           << "\" r=\"4\" fill=\"#1f6fb2\"/>\n";
        os << "  <text x=\"" << px(b.x) << "\" y=\"" << py(b.y)
           << "\" dx=\"6\" dy=\"-6\" font-size=\"12\">(" << rat_to_string(b.x) << ","
           << rat_to_string(b.y) << ")</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace hn
