#include "hn/rational.hpp"

namespace hn {

Rat rat_from_string(const std::string& s) {
    if (s.empty()) throw InvalidInput("empty rational string");
    for (char c : s) {
        if (!(c == '-' || c == '/' || (c >= '0' && c <= '9')))
            throw InvalidInput("bad rational string: '" + s + "'");
    }
    mpq_class q;
    if (q.set_str(s, 10) != 0) throw InvalidInput("bad rational string: '" + s + "'");
    if (q.get_den() == 0) throw InvalidInput("zero denominator in '" + s + "'");
    q.canonicalize();
    return q;
}

std::string rat_to_string(const Rat& q) {
    return q.get_str();
}

bool is_integer(const Rat& q) {
    return q.get_den() == 1;
}

Int rat_floor(const Rat& q) {
    Int quo;
    mpz_fdiv_q(quo.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
    return quo;
}

long vp_int(const Int& z, const Int& p) {
    if (z == 0) throw ArithmeticError("vp of zero");
    Int a = abs(z);
    long v = 0;
    Int q, r;
    while (true) {
        mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), a.get_mpz_t(), p.get_mpz_t());
        if (r != 0) break;
        a = q;
        ++v;
    }
    return v;
}

long vp_rat(const Rat& q, const Int& p) {
    if (q == 0) throw ArithmeticError("vp of zero");
    return vp_int(q.get_num(), p) - vp_int(q.get_den(), p);
}

} // namespace hn
