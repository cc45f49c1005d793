#include "hn/htmod.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>

namespace hn {

namespace {

std::atomic<long> g_enum_bound{6};

Int p_power(const Int& p, long e) {
    Int r;
    mpz_pow_ui(r.get_mpz_t(), p.get_mpz_t(), static_cast<unsigned long>(e));
    return r;
}

KMatrix z_to_k(FieldConfig f, const ZMatrix& z) {
    KMatrix m(f, z.rows(), z.cols());
    for (size_t i = 0; i < z.rows(); ++i)
        for (size_t j = 0; j < z.cols(); ++j)
            m.at(i, j) = FieldElement::from_rat(f, Rat(z.at(i, j)));
    return m;
}

// diag(pi^{c_i k}) relation matrix for the omega divisors.
KMatrix relation_matrix(const TorsionHTModule& x) {
    const size_t m = x.omega.divisors.size();
    KMatrix rel(x.field, m, m);
    for (size_t i = 0; i < m; ++i) {
        Rat scaled = x.omega.divisors[i] * x.field.k;
        rel.at(i, i) = FieldElement::pi_pow(x.field, scaled.get_num().get_si());
    }
    return rel;
}

// alpha applied to an element of M given in M-coordinates.
std::vector<FieldElement> alpha_image(const TorsionHTModule& x, const std::vector<Int>& coords) {
    const size_t m = x.alpha.rows();
    std::vector<FieldElement> img(m, FieldElement::zero(x.field));
    for (size_t j = 0; j < x.rank(); ++j) {
        if (coords[j] == 0) continue;
        Rat c = Rat(coords[j]);
        for (size_t i = 0; i < m; ++i) img[i] = img[i] + x.alpha.at(i, j).scale(c);
    }
    return img;
}

KMatrix image_matrix(const TorsionHTModule& x, const std::vector<std::vector<Int>>& gens) {
    std::vector<std::vector<FieldElement>> cols;
    cols.reserve(gens.size());
    for (const auto& g : gens) cols.push_back(alpha_image(x, g));
    return KMatrix::from_columns(x.field, x.alpha.rows(), cols);
}

// deg(omega / O·alpha(gens)).
Rat quotient_degree(const TorsionHTModule& x, const KMatrix& images) {
    if (x.omega.divisors.empty()) return Rat(0);
    KMatrix pres = images.cols() ? images.augment(relation_matrix(x)) : relation_matrix(x);
    auto divs = elementary_divisors(pres);
    Rat s = 0;
    for (const auto& d : divs) s += d;
    return s;
}

void check_same_field(const FieldConfig& a, const FieldConfig& b) {
    if (a != b) throw InvalidInput("field config mismatch");
}

} // namespace

long subgroup_enum_bound() { return g_enum_bound.load(); }
void set_subgroup_enum_bound(long exp) { g_enum_bound.store(exp); }

// ---------------------------------------------------------------------------
// Subgroup

std::vector<Int> Subgroup::embed(const std::vector<Int>& m_coords) const {
    if (m_coords.size() != type_.size()) throw InvalidInput("subgroup element length mismatch");
    const int e1 = type_.empty() ? 1 : type_[0];
    std::vector<Int> x(m_coords.size());
    for (size_t j = 0; j < m_coords.size(); ++j)
        x[j] = m_coords[j] * p_power(Int(p_), e1 - type_[j]);
    return x;
}

Subgroup Subgroup::zero(long p, std::vector<int> ambient_type) {
    Subgroup s;
    s.p_ = p;
    s.type_ = std::move(ambient_type);
    const int e1 = s.type_.empty() ? 1 : s.type_[0];
    s.howell_ = HowellForm(Int(p), e1, s.type_.size(), ZMatrix(s.type_.size(), 0));
    return s;
}

Subgroup Subgroup::full(long p, std::vector<int> ambient_type) {
    std::vector<std::vector<Int>> gens;
    for (size_t j = 0; j < ambient_type.size(); ++j) {
        std::vector<Int> g(ambient_type.size(), Int(0));
        g[j] = 1;
        gens.push_back(std::move(g));
    }
    return from_generators(p, std::move(ambient_type), gens);
}

Subgroup Subgroup::from_generators(long p, std::vector<int> ambient_type,
                                   const std::vector<std::vector<Int>>& gens) {
    for (size_t j = 1; j < ambient_type.size(); ++j)
        if (ambient_type[j] > ambient_type[j - 1])
            throw InvalidInput("ambient cyclic type must be weakly decreasing");
    for (int e : ambient_type)
        if (e < 1) throw InvalidInput("ambient cyclic type entries must be >= 1");
    Subgroup s;
    s.p_ = p;
    s.type_ = std::move(ambient_type);
    const int e1 = s.type_.empty() ? 1 : s.type_[0];
    std::vector<std::vector<Int>> cols;
    for (const auto& g : gens) cols.push_back(s.embed(g));
    s.howell_ = HowellForm(Int(p), e1, s.type_.size(), ZMatrix::from_columns(s.type_.size(), cols));
    return s;
}

bool Subgroup::is_full() const {
    long total = 0;
    for (int e : type_) total += e;
    return height() == total;
}

bool Subgroup::contains(const Subgroup& other) const {
    if (type_ != other.type_ || p_ != other.p_) throw InvalidInput("subgroup ambient mismatch");
    return howell_.contains(other.howell_);
}

bool Subgroup::contains_element(const std::vector<Int>& m_coords) const {
    return howell_.contains(embed(m_coords));
}

Subgroup Subgroup::join(const Subgroup& other) const {
    if (type_ != other.type_ || p_ != other.p_) throw InvalidInput("subgroup ambient mismatch");
    Subgroup s(*this);
    s.howell_ = howell_.join(other.howell_);
    return s;
}

Subgroup Subgroup::join_element(const std::vector<Int>& m_coords) const {
    Subgroup s(*this);
    s.howell_ = howell_.join_element(embed(m_coords));
    return s;
}

long Subgroup::torsion_height(long t) const {
    return height() - howell_.p_multiple(t).height();
}

Subgroup Subgroup::p_preimage_in_ambient() const {
    for (size_t j = 1; j < type_.size(); ++j)
        if (type_[j] != type_[0])
            throw InvalidInput("p_preimage needs a homogeneous ambient");
    Subgroup s(*this);
    s.howell_ = howell_.p_preimage();
    return s;
}

Subgroup Subgroup::lift_level() const {
    for (size_t j = 1; j < type_.size(); ++j)
        if (type_[j] != type_[0])
            throw InvalidInput("lift_level needs a homogeneous ambient");
    const int m = type_.empty() ? 1 : type_[0];
    Subgroup s;
    s.p_ = p_;
    s.type_.assign(type_.size(), m + 1);
    ZMatrix g(type_.size(), howell_.matrix().cols());
    for (size_t i = 0; i < g.rows(); ++i)
        for (size_t j = 0; j < g.cols(); ++j) g.at(i, j) = howell_.matrix().at(i, j) * Int(p_);
    s.howell_ = HowellForm(Int(p_), m + 1, type_.size(), g);
    return s;
}

std::vector<std::vector<Int>> Subgroup::generators() const {
    const int e1 = type_.empty() ? 1 : type_[0];
    std::vector<std::vector<Int>> out;
    const ZMatrix& m = howell_.matrix();
    for (size_t j = 0; j < m.cols(); ++j) {
        std::vector<Int> g(type_.size());
        for (size_t i = 0; i < type_.size(); ++i) {
            Int scale = p_power(Int(p_), e1 - type_[i]);
            if (m.at(i, j) % scale != 0)
                throw InvalidInput("subgroup is not contained in the ambient group");
            g[i] = m.at(i, j) / scale;
        }
        out.push_back(std::move(g));
    }
    return out;
}

Subgroup::AdaptedBasis Subgroup::adapted_basis() const {
    AdaptedBasis out;
    auto gens = generators();
    if (gens.empty()) return out;
    const size_t s = type_.size();
    // L_sub = span(gens) + diag(p^{e_j}); B = Hermite basis of L_sub;
    // M' = L_sub / diag  ≅  Z^s / (B^{-1} diag) Z^s.
    std::vector<std::vector<Int>> cols = gens;
    for (size_t j = 0; j < s; ++j) {
        std::vector<Int> d(s, Int(0));
        d[j] = p_power(Int(p_), type_[j]);
        cols.push_back(std::move(d));
    }
    ZMatrix b = hermite_normal_form(ZMatrix::from_columns(s, cols));
    if (b.cols() != s) throw ArithmeticError("adapted_basis: degenerate Hermite form");
    // forward substitution: b is lower triangular with positive diagonal
    ZMatrix c(s, s);
    for (size_t col = 0; col < s; ++col) {
        for (size_t i = 0; i < s; ++i) {
            Int rhs = (i == col) ? p_power(Int(p_), type_[col]) : Int(0);
            for (size_t j = 0; j < i; ++j) rhs -= b.at(i, j) * c.at(j, col);
            if (rhs % b.at(i, i) != 0) throw ArithmeticError("adapted_basis: inexact division");
            c.at(i, col) = rhs / b.at(i, i);
        }
    }
    auto sd = smith_decompose(c);
    // generators of M' are B * u_i with orders d_i, ascending; emit descending
    std::vector<std::pair<int, std::vector<Int>>> items;
    for (size_t i = 0; i < s; ++i) {
        const Int& d = sd.divisors[i];
        if (d == 0) throw ArithmeticError("adapted_basis: unexpected free quotient");
        if (d == 1) continue;
        long f = vp_int(d, Int(p_));
        std::vector<Int> gen(s, Int(0));
        for (size_t row = 0; row < s; ++row) {
            Int acc = 0;
            for (size_t t = 0; t < s; ++t) acc += b.at(row, t) * sd.basis.at(t, i);
            Int mod = p_power(Int(p_), type_[row]);
            mpz_fdiv_r(acc.get_mpz_t(), acc.get_mpz_t(), mod.get_mpz_t());
            gen[row] = acc;
        }
        items.emplace_back(static_cast<int>(f), std::move(gen));
    }
    std::stable_sort(items.begin(), items.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (auto& [f, g] : items) {
        out.type.push_back(f);
        out.gens.push_back(std::move(g));
    }
    return out;
}

bool Subgroup::operator==(const Subgroup& o) const {
    return p_ == o.p_ && type_ == o.type_ && howell_ == o.howell_;
}

// ---------------------------------------------------------------------------
// Module construction

TorsionHTModule TorsionHTModule::make(FieldConfig field, std::vector<int> cyclic_type,
                                      std::vector<Rat> omega_divisors, KMatrix alpha) {
    for (size_t j = 1; j < cyclic_type.size(); ++j)
        if (cyclic_type[j] > cyclic_type[j - 1])
            throw InvalidInput("cyclic type must be weakly decreasing");
    for (int e : cyclic_type)
        if (e < 1) throw InvalidInput("cyclic type entries must be >= 1");
    if (alpha.rows() != omega_divisors.size() || alpha.cols() != cyclic_type.size())
        throw InvalidInput("alpha shape must be (#divisors) x (#generators)");
    TorsionHTModule x;
    x.field = field;
    x.cyclic_type = std::move(cyclic_type);
    x.omega = TorsionModule::make(field, std::move(omega_divisors));
    x.alpha = std::move(alpha);
    return x;
}

TorsionHTModule TorsionHTModule::zero(FieldConfig field) {
    return make(field, {}, {}, KMatrix(field, 0, 0));
}

long TorsionHTModule::height() const {
    long h = 0;
    for (int e : cyclic_type) h += e;
    return h;
}

IntegralHTModule IntegralHTModule::make(FieldConfig field, int n, KMatrix alpha) {
    if (n < 0) throw InvalidInput("rank must be >= 0");
    if (alpha.cols() != static_cast<size_t>(n)) throw InvalidInput("alpha must have n columns");
    IntegralHTModule x;
    x.field = field;
    x.n = n;
    x.alpha = std::move(alpha);
    auto d = validate(x);
    if (!d.ok) {
        std::string msg = "invalid integral module:";
        for (const auto& i : d.issues) msg += " " + i;
        throw InvalidInput(msg);
    }
    return x;
}

// ---------------------------------------------------------------------------
// Validation and metrics

Diagnostics validate(const TorsionHTModule& x) {
    Diagnostics d;
    const size_t m = x.omega.divisors.size();
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < x.rank(); ++j) {
            const auto& a = x.alpha.at(i, j);
            if (!a.is_zero() && !a.in_ring()) {
                d.fail("alpha entry (" + std::to_string(i) + "," + std::to_string(j) +
                       ") has negative valuation");
                return d;
            }
        }
    // p-power compatibility: alpha(p^{e_j} g_j) = 0 in omega
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < x.rank(); ++j) {
            const auto& a = x.alpha.at(i, j);
            if (a.is_zero()) continue;
            Rat v = a.valuation().finite();
            if (v + x.cyclic_type[j] < x.omega.divisors[i])
                d.fail("p-power compatibility fails at alpha(" + std::to_string(i) + "," +
                       std::to_string(j) + ")");
        }
    // generation: O·alpha(M) = omega
    Rat qdeg = quotient_degree(x, x.alpha);
    if (qdeg != 0) d.fail("generation fails: O.alpha(M) has codegree " + rat_to_string(qdeg));
    return d;
}

Diagnostics validate(const IntegralHTModule& x) {
    Diagnostics d;
    const size_t r = x.alpha.rows();
    if (r > static_cast<size_t>(x.n)) {
        d.fail("omega rank exceeds lattice rank");
        return d;
    }
    for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < x.alpha.cols(); ++j) {
            const auto& a = x.alpha.at(i, j);
            if (!a.is_zero() && !a.in_ring()) {
                d.fail("alpha entry (" + std::to_string(i) + "," + std::to_string(j) +
                       ") has negative valuation");
                return d;
            }
        }
    auto divs = elementary_divisors(x.alpha);
    if (divs.size() != r) {
        d.fail("generation fails: alpha has rank " + std::to_string(divs.size()) +
               " < omega rank " + std::to_string(r));
        return d;
    }
    for (const auto& dv : divs)
        if (dv != 0) {
            d.fail("generation fails: no unit " + std::to_string(r) + "x" + std::to_string(r) +
                   " minor (elementary divisor " + rat_to_string(dv) + ")");
            break;
        }
    return d;
}

TorsionMetrics metrics(const TorsionHTModule& x) {
    if (x.is_zero()) throw DomainError("slope of the zero module is undefined");
    Rat ht(x.height());
    Rat deg = ht - x.omega.degree();
    return TorsionMetrics{deg, ht, deg / ht};
}

RationalMetrics metrics_rational(const IntegralHTModule& x) {
    if (x.n == 0) throw DomainError("slope of the zero module is undefined");
    Rat dim(x.n - x.r());
    Rat ht(x.n);
    return RationalMetrics{dim, ht, dim / ht};
}

// ---------------------------------------------------------------------------
// Truncation, closures, quotients

TorsionHTModule truncate(const IntegralHTModule& x, int m) {
    if (m < 0) throw InvalidInput("truncate: level must be >= 0");
    if (m == 0) return TorsionHTModule::zero(x.field);
    std::vector<int> type(static_cast<size_t>(x.n), m);
    std::vector<Rat> divisors(x.alpha.rows(), Rat(m));
    return TorsionHTModule::make(x.field, std::move(type), std::move(divisors), x.alpha);
}

std::pair<Rat, Rat> closure_ht_deg(const TorsionHTModule& x, const Subgroup& s) {
    if (s.ambient_type() != x.cyclic_type) throw InvalidInput("subgroup does not live in M");
    Rat ht(s.height());
    if (ht == 0) return {Rat(0), Rat(0)};
    KMatrix images = image_matrix(x, s.generators());
    Rat deg_n = x.omega.degree() - quotient_degree(x, images);
    return {ht, ht - deg_n};
}

TorsionHTModule schematic_closure(const TorsionHTModule& x, const Subgroup& s) {
    if (s.ambient_type() != x.cyclic_type) throw InvalidInput("subgroup does not live in M");
    auto ab = s.adapted_basis();
    const size_t t = ab.gens.size();
    if (t == 0) return TorsionHTModule::zero(x.field);
    const size_t m = x.omega.divisors.size();
    KMatrix images = image_matrix(x, ab.gens);
    if (m == 0)
        return TorsionHTModule::make(x.field, ab.type, {}, KMatrix(x.field, 0, t));
    // K = {c in O^t : images*c in relations} = projection of ker[images | rel]
    KMatrix big = images.augment(relation_matrix(x));
    KMatrix ker = nullspace(big);
    if (ker.cols() != t) throw ArithmeticError("schematic_closure: unexpected kernel rank");
    KMatrix sat = saturate_columns(ker);
    KMatrix kmat(x.field, t, t);
    for (size_t i = 0; i < t; ++i)
        for (size_t j = 0; j < t; ++j) kmat.at(i, j) = sat.at(i, j);
    auto df = diagonalize_full_rank(kmat);
    // N ≅ O^t / K; generator l has coordinates = column l of the left transform
    std::vector<std::pair<Rat, std::vector<FieldElement>>> rows;
    for (size_t q = 0; q < t; ++q) {
        if (df.divisors[q] == 0) continue;
        std::vector<FieldElement> row(t, FieldElement::zero(x.field));
        for (size_t l = 0; l < t; ++l) row[l] = df.left.at(q, l);
        rows.emplace_back(df.divisors[q], std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<Rat> divisors;
    KMatrix alpha(x.field, rows.size(), t);
    for (size_t q = 0; q < rows.size(); ++q) {
        divisors.push_back(rows[q].first);
        for (size_t l = 0; l < t; ++l) alpha.at(q, l) = rows[q].second[l];
    }
    return TorsionHTModule::make(x.field, ab.type, std::move(divisors), std::move(alpha));
}

TorsionHTModule quotient_torsion(const TorsionHTModule& x, const Subgroup& s) {
    if (s.ambient_type() != x.cyclic_type) throw InvalidInput("subgroup does not live in M");
    const size_t sdim = x.rank();
    if (sdim == 0) return TorsionHTModule::zero(x.field);
    // quotient group M/M'
    std::vector<std::vector<Int>> cols = s.generators();
    for (size_t j = 0; j < sdim; ++j) {
        std::vector<Int> d(sdim, Int(0));
        d[j] = p_power(Int(x.field.p), x.cyclic_type[j]);
        cols.push_back(std::move(d));
    }
    auto sd = smith_decompose(ZMatrix::from_columns(sdim, cols));
    std::vector<std::pair<int, std::vector<Int>>> qgens; // (order exponent, lift)
    for (size_t i = 0; i < sdim; ++i) {
        const Int& d = sd.divisors[i];
        if (d == 0) throw ArithmeticError("quotient_torsion: free quotient");
        if (d == 1) continue;
        long f = vp_int(d, Int(x.field.p));
        std::vector<Int> lift(sdim);
        for (size_t row = 0; row < sdim; ++row) lift[row] = sd.basis.at(row, i);
        qgens.emplace_back(static_cast<int>(f), std::move(lift));
    }
    std::stable_sort(qgens.begin(), qgens.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    if (qgens.empty()) return TorsionHTModule::zero(x.field);

    const size_t m = x.omega.divisors.size();
    std::vector<int> qtype;
    for (auto& [f, lift] : qgens) qtype.push_back(f);
    if (m == 0) {
        return TorsionHTModule::make(x.field, qtype, {}, KMatrix(x.field, 0, qgens.size()));
    }
    // omega/N presented by [images | relations]
    KMatrix images = image_matrix(x, s.generators());
    KMatrix pres = images.cols() ? images.augment(relation_matrix(x)) : relation_matrix(x);
    auto df = diagonalize_full_rank(pres);
    // coordinates of alpha(lift) in the diagonal presentation: left * alpha(lift)
    std::vector<std::pair<Rat, size_t>> keep; // (divisor, row index)
    for (size_t q = 0; q < m; ++q)
        if (df.divisors[q] != 0) keep.emplace_back(df.divisors[q], q);
    std::stable_sort(keep.begin(), keep.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<Rat> qdivs;
    for (auto& [dv, q] : keep) qdivs.push_back(dv);
    KMatrix qalpha(x.field, keep.size(), qgens.size());
    for (size_t j = 0; j < qgens.size(); ++j) {
        auto img = alpha_image(x, qgens[j].second);
        for (size_t qi = 0; qi < keep.size(); ++qi) {
            size_t q = keep[qi].second;
            FieldElement acc = FieldElement::zero(x.field);
            for (size_t i = 0; i < m; ++i) acc = acc + df.left.at(q, i) * img[i];
            qalpha.at(qi, j) = acc;
        }
    }
    return TorsionHTModule::make(x.field, qtype, std::move(qdivs), std::move(qalpha));
}

// ---------------------------------------------------------------------------
// Enumeration and Harder-Narasimhan data

namespace {

void all_elements_rec(const std::vector<Int>& orders, size_t j, std::vector<Int>& cur,
                      std::vector<std::vector<Int>>& out) {
    if (j == orders.size()) {
        out.push_back(cur);
        return;
    }
    for (Int a = 0; a < orders[j]; ++a) {
        cur[j] = a;
        all_elements_rec(orders, j + 1, cur, out);
    }
}

std::vector<std::vector<Int>> all_elements(long p, const std::vector<int>& type) {
    std::vector<Int> orders;
    for (int e : type) orders.push_back(p_power(Int(p), e));
    std::vector<std::vector<Int>> out;
    std::vector<Int> cur(type.size(), Int(0));
    all_elements_rec(orders, 0, cur, out);
    return out;
}

} // namespace

std::vector<Subgroup> enumerate_subgroups(long p, const std::vector<int>& type, long bound_exp) {
    long total = 0;
    for (int e : type) total += e;
    if (total > bound_exp)
        throw ResourceError("subgroup enumeration bound exceeded: |M| = p^" +
                            std::to_string(total) + " > p^" + std::to_string(bound_exp));
    auto elems = all_elements(p, type);
    std::map<std::string, Subgroup> seen;
    std::queue<Subgroup> work;
    Subgroup z = Subgroup::zero(p, type);
    seen.emplace(z.key(), z);
    work.push(z);
    while (!work.empty()) {
        Subgroup s = work.front();
        work.pop();
        for (const auto& x : elems) {
            Subgroup j = s.join_element(x);
            auto key = j.key();
            if (seen.count(key)) continue;
            seen.emplace(key, j);
            work.push(j);
        }
    }
    std::vector<Subgroup> out;
    out.reserve(seen.size());
    for (auto& [k, s] : seen) out.push_back(s);
    std::sort(out.begin(), out.end(), [](const Subgroup& a, const Subgroup& b) {
        if (a.height() != b.height()) return a.height() < b.height();
        return a.key() < b.key();
    });
    return out;
}

namespace {

void fp_bases_rec(long p, size_t q, const std::vector<size_t>& pivots, size_t free_idx,
                  const std::vector<std::pair<size_t, size_t>>& free_pos,
                  std::vector<std::vector<Int>>& rows,
                  std::vector<std::vector<std::vector<Int>>>& out) {
    if (free_idx == free_pos.size()) {
        out.push_back(rows);
        return;
    }
    auto [i, j] = free_pos[free_idx];
    for (long v = 0; v < p; ++v) {
        rows[i][j] = v;
        fp_bases_rec(p, q, pivots, free_idx + 1, free_pos, rows, out);
    }
    rows[i][j] = 0;
}

void pivot_sets_rec(size_t q, size_t d, size_t start, std::vector<size_t>& cur,
                    std::vector<std::vector<size_t>>& out) {
    if (cur.size() == d) {
        out.push_back(cur);
        return;
    }
    for (size_t j = start; j < q; ++j) {
        cur.push_back(j);
        pivot_sets_rec(q, d, j + 1, cur, out);
        cur.pop_back();
    }
}

} // namespace

std::vector<std::vector<std::vector<Int>>> fp_subspace_bases(long p, size_t q) {
    std::vector<std::vector<std::vector<Int>>> out;
    out.push_back({}); // zero subspace
    for (size_t d = 1; d <= q; ++d) {
        std::vector<std::vector<size_t>> pivot_sets;
        std::vector<size_t> cur;
        pivot_sets_rec(q, d, 0, cur, pivot_sets);
        for (const auto& pv : pivot_sets) {
            std::vector<bool> is_pivot(q, false);
            for (size_t j : pv) is_pivot[j] = true;
            std::vector<std::pair<size_t, size_t>> free_pos;
            for (size_t i = 0; i < d; ++i)
                for (size_t j = pv[i] + 1; j < q; ++j)
                    if (!is_pivot[j]) free_pos.emplace_back(i, j);
            std::vector<std::vector<Int>> rows(d, std::vector<Int>(q, Int(0)));
            for (size_t i = 0; i < d; ++i) rows[i][pv[i]] = 1;
            fp_bases_rec(p, q, pv, 0, free_pos, rows, out);
        }
    }
    return out;
}

ConcavePolygon hn_polygon_torsion(const TorsionHTModule& x, long bound_exp) {
    auto d = validate(x);
    if (!d.ok) throw InvalidInput("hn_polygon_torsion: module does not validate: " + d.issues[0]);
    if (x.is_zero()) return ConcavePolygon::zero();
    auto subs = enumerate_subgroups(x.field.p, x.cyclic_type, bound_exp);
    std::vector<ConcavePolygon::Point> pts;
    pts.reserve(subs.size());
    for (const auto& s : subs) {
        auto [ht, deg] = closure_ht_deg(x, s);
        pts.push_back({ht, deg});
    }
    return concave_envelope(pts);
}

namespace {

struct CranScan {
    Rat mu_max;
    Subgroup best;
    bool found = false;
};

CranScan scan_first_cran(const TorsionHTModule& x, long bound_exp) {
    auto subs = enumerate_subgroups(x.field.p, x.cyclic_type, bound_exp);
    CranScan out;
    Rat best_ht(-1);
    size_t ties = 0;
    for (const auto& s : subs) {
        if (s.is_zero()) continue;
        auto [ht, deg] = closure_ht_deg(x, s);
        Rat mu = deg / ht;
        if (!out.found || mu > out.mu_max) {
            out.found = true;
            out.mu_max = mu;
            out.best = s;
            best_ht = ht;
            ties = 1;
        } else if (mu == out.mu_max) {
            if (ht > best_ht) {
                out.best = s;
                best_ht = ht;
                ties = 1;
            } else if (ht == best_ht) {
                ++ties;
            }
        }
    }
    if (out.found && ties != 1)
        throw ArithmeticError("first cran is not unique; module violates HN theory");
    return out;
}

} // namespace

Subgroup first_cran(const TorsionHTModule& x, long bound_exp) {
    if (x.is_zero()) throw InvalidInput("first_cran of the zero module");
    auto scan = scan_first_cran(x, bound_exp);
    if (!scan.found) throw InvalidInput("first_cran: no nonzero subgroup");
    return scan.best;
}

Rat mu_max_torsion(const TorsionHTModule& x, long bound_exp) {
    if (x.is_zero()) throw InvalidInput("mu_max of the zero module");
    return scan_first_cran(x, bound_exp).mu_max;
}

bool is_semistable(const TorsionHTModule& x, long bound_exp) {
    if (x.is_zero()) throw InvalidInput("semistability of the zero module");
    return mu_max_torsion(x, bound_exp) == metrics(x).mu;
}

bool is_semistable(const IntegralHTModule& x, long bound_exp) {
    if (x.n == 0) throw InvalidInput("semistability of the zero module");
    return is_semistable(truncate(x, 1), bound_exp);
}

// ---------------------------------------------------------------------------
// Isogenies, sums, filtered spaces

IsogenyResult apply_isogeny_full(const IntegralHTModule& x, const Subgroup& lambda) {
    if (lambda.ambient_rank() != static_cast<size_t>(x.n))
        throw InvalidInput("apply_isogeny: lattice rank mismatch");
    if (lambda.p() != x.field.p) throw InvalidInput("apply_isogeny: prime mismatch");
    for (int e : lambda.ambient_type())
        if (e != lambda.ambient_type()[0])
            throw InvalidInput("apply_isogeny: lattice must live in p^{-N}T/T");
    const int N = lambda.ambient_type().empty() ? 1 : lambda.ambient_type()[0];
    const size_t n = static_cast<size_t>(x.n);
    Int pN = p_power(Int(x.field.p), N);
    // lattice p^N Λ = span(p^N I, generator lifts)
    std::vector<std::vector<Int>> cols = lambda.generators();
    for (size_t j = 0; j < n; ++j) {
        std::vector<Int> c(n, Int(0));
        c[j] = pN;
        cols.push_back(std::move(c));
    }
    ZMatrix b = hermite_normal_form(ZMatrix::from_columns(n, cols));
    if (b.cols() != n) throw ArithmeticError("apply_isogeny: degenerate lattice");
    bool identity = true;
    for (size_t i = 0; i < n && identity; ++i)
        for (size_t j = 0; j < n && identity; ++j)
            if (b.at(i, j) != ((i == j) ? pN : Int(0))) identity = false;
    if (identity) return IsogenyResult{x, std::move(b), N, true};
    if (x.alpha.rows() == 0) {
        // omega = 0: only the lattice changes; the triple is structurally the
        // same.
        return IsogenyResult{IntegralHTModule::make(x.field, x.n, KMatrix(x.field, 0, n)),
                             std::move(b), N, false};
    }
    // alpha on the new basis; the common factor p^{-N} cancels between omega
    // re-freeing and coordinates
    KMatrix ab = x.alpha * z_to_k(x.field, b);
    KMatrix w = module_column_basis(ab);
    if (w.cols() != x.alpha.rows()) throw ArithmeticError("apply_isogeny: omega rank dropped");
    KMatrix anew = solve_linear(w, ab);
    return IsogenyResult{IntegralHTModule::make(x.field, x.n, std::move(anew)), std::move(b), N,
                         false};
}

IntegralHTModule apply_isogeny(const IntegralHTModule& x, const Subgroup& lambda) {
    return apply_isogeny_full(x, lambda).module;
}

TorsionHTModule direct_sum(const TorsionHTModule& x, const TorsionHTModule& y) {
    check_same_field(x.field, y.field);
    if (x.is_zero() && y.is_zero()) return TorsionHTModule::zero(x.field);
    struct Col {
        int e;
        size_t src; // 0 = x, 1 = y
        size_t j;
    };
    struct Row {
        Rat d;
        size_t src;
        size_t i;
    };
    std::vector<Col> cols;
    for (size_t j = 0; j < x.rank(); ++j) cols.push_back({x.cyclic_type[j], 0, j});
    for (size_t j = 0; j < y.rank(); ++j) cols.push_back({y.cyclic_type[j], 1, j});
    std::stable_sort(cols.begin(), cols.end(), [](const Col& a, const Col& b) { return a.e > b.e; });
    std::vector<Row> rows;
    for (size_t i = 0; i < x.omega.divisors.size(); ++i) rows.push_back({x.omega.divisors[i], 0, i});
    for (size_t i = 0; i < y.omega.divisors.size(); ++i) rows.push_back({y.omega.divisors[i], 1, i});
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.d > b.d; });
    std::vector<int> type;
    std::vector<Rat> divisors;
    KMatrix alpha(x.field, rows.size(), cols.size());
    for (auto& c : cols) type.push_back(c.e);
    for (auto& r : rows) divisors.push_back(r.d);
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < cols.size(); ++j) {
            if (rows[i].src != cols[j].src) continue;
            const auto& src = rows[i].src == 0 ? x : y;
            alpha.at(i, j) = src.alpha.at(rows[i].i, cols[j].j);
        }
    return TorsionHTModule::make(x.field, std::move(type), std::move(divisors), std::move(alpha));
}

IntegralHTModule direct_sum(const IntegralHTModule& x, const IntegralHTModule& y) {
    check_same_field(x.field, y.field);
    KMatrix alpha(x.field, x.alpha.rows() + y.alpha.rows(), x.n + y.n);
    for (size_t i = 0; i < x.alpha.rows(); ++i)
        for (size_t j = 0; j < x.alpha.cols(); ++j) alpha.at(i, j) = x.alpha.at(i, j);
    for (size_t i = 0; i < y.alpha.rows(); ++i)
        for (size_t j = 0; j < y.alpha.cols(); ++j)
            alpha.at(x.alpha.rows() + i, x.alpha.cols() + j) = y.alpha.at(i, j);
    return IntegralHTModule::make(x.field, x.n + y.n, std::move(alpha));
}

FilteredSpace to_filtered_space(const IntegralHTModule& x) {
    KMatrix fil1 = nullspace(x.alpha);
    return FilteredSpace{x.n, std::move(fil1)};
}

IntegralHTModule sub_module(const IntegralHTModule& x, const ZMatrix& sat_basis) {
    if (sat_basis.rows() != static_cast<size_t>(x.n))
        throw InvalidInput("sub_module: basis shape mismatch");
    const size_t c = sat_basis.cols();
    KMatrix af = x.alpha * z_to_k(x.field, sat_basis);
    size_t s = rank(af);
    if (s == 0) return IntegralHTModule::make(x.field, static_cast<int>(c), KMatrix(x.field, 0, c));
    KMatrix w = module_column_basis(af);
    KMatrix asub = solve_in_span(w, af);
    return IntegralHTModule::make(x.field, static_cast<int>(c), std::move(asub));
}

QuotientModule quotient_module(const IntegralHTModule& x, const ZMatrix& sat_basis) {
    const size_t n = static_cast<size_t>(x.n);
    const size_t c = sat_basis.cols();
    if (sat_basis.rows() != n) throw InvalidInput("quotient_module: basis shape mismatch");
    auto sd = smith_decompose(sat_basis);
    for (size_t i = 0; i < c; ++i)
        if (sd.divisors[i] != 1) throw InvalidInput("quotient_module: sublattice is not saturated");
    ZMatrix section(n, n - c);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n - c; ++j) section.at(i, j) = sd.basis.at(i, c + j);
    KMatrix a_sec = x.alpha * z_to_k(x.field, section);
    KMatrix af = x.alpha * z_to_k(x.field, sat_basis);
    size_t s = rank(af);
    if (s == 0) {
        return QuotientModule{IntegralHTModule::make(x.field, static_cast<int>(n - c), a_sec),
                              section};
    }
    KMatrix wmod = module_column_basis(af);
    std::vector<size_t> pivots;
    KMatrix wsat = saturate_columns(wmod, &pivots);
    std::vector<bool> is_pivot(x.alpha.rows(), false);
    for (size_t pr : pivots) is_pivot[pr] = true;
    // complete the saturated basis with the complementary standard vectors
    KMatrix full(x.field, x.alpha.rows(), x.alpha.rows());
    for (size_t j = 0; j < s; ++j)
        for (size_t i = 0; i < x.alpha.rows(); ++i) full.at(i, j) = wsat.at(i, j);
    size_t col = s;
    for (size_t i = 0; i < x.alpha.rows(); ++i) {
        if (is_pivot[i]) continue;
        full.at(i, col) = FieldElement::one(x.field);
        ++col;
    }
    KMatrix coords = solve_linear(full, a_sec);
    KMatrix aq(x.field, x.alpha.rows() - s, n - c);
    for (size_t i = s; i < x.alpha.rows(); ++i)
        for (size_t j = 0; j < n - c; ++j) aq.at(i - s, j) = coords.at(i, j);
    return QuotientModule{IntegralHTModule::make(x.field, static_cast<int>(n - c), std::move(aq)),
                          section};
}

} // namespace hn
