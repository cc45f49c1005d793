#include "hn/json_io.hpp"

#include <sstream>

namespace hn::io {

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    throw InvalidInput((path.empty() ? std::string("/") : path) + ": " + what);
}

const json& field(const json& j, const char* key, const std::string& path) {
    if (!j.is_object()) bad(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) bad(path + "/" + key, "missing");
    return *it;
}

long int_field(const json& j, const std::string& path) {
    if (!j.is_number_integer()) bad(path, "expected an integer");
    return j.get<long>();
}

} // namespace

json rat_json(const Rat& q) {
    return rat_to_string(q);
}

Rat rat_from(const json& j, const std::string& path) {
    if (j.is_number_integer()) return Rat(j.get<long>());
    if (!j.is_string()) bad(path, "expected a rational string");
    try {
        return rat_from_string(j.get<std::string>());
    } catch (const InvalidInput& e) {
        bad(path, e.what());
    }
}

json to_json(const ConcavePolygon& p) {
    json pts = json::array();
    for (const auto& b : p.breakpoints()) pts.push_back({rat_json(b.x), rat_json(b.y)});
    return json{{"breakpoints", pts}};
}

ConcavePolygon polygon_from_json(const json& j, const std::string& path) {
    const json& pts = field(j, "breakpoints", path);
    if (!pts.is_array()) bad(path + "/breakpoints", "expected an array");
    std::vector<ConcavePolygon::Point> out;
    for (size_t i = 0; i < pts.size(); ++i) {
        const json& p = pts[i];
        std::string ppath = path + "/breakpoints/" + std::to_string(i);
        if (!p.is_array() || p.size() != 2) bad(ppath, "expected [x, y]");
        out.push_back({rat_from(p[0], ppath + "/0"), rat_from(p[1], ppath + "/1")});
    }
    try {
        return ConcavePolygon::from_breakpoints(std::move(out));
    } catch (const InvalidInput& e) {
        bad(path + "/breakpoints", e.what());
    }
}

json to_json(const HalfLinePolygon& p) {
    return json{{"finite", to_json(p.finite_part)}, {"tail_slope", rat_json(p.tail_slope)}};
}

std::string polygon_csv(const ConcavePolygon& p) {
    std::ostringstream os;
    for (const auto& b : p.breakpoints())
        os << rat_to_string(b.x) << "," << rat_to_string(b.y) << "\n";
    return os.str();
}

ConcavePolygon polygon_from_csv(const std::string& csv) {
    std::vector<ConcavePolygon::Point> pts;
    std::istringstream is(csv);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw InvalidInput("csv line without comma: " + line);
        pts.push_back({rat_from_string(line.substr(0, comma)),
                       rat_from_string(line.substr(comma + 1))});
    }
    return ConcavePolygon::from_breakpoints(std::move(pts));
}

json to_json(const FieldConfig& f) {
    return json{{"p", f.p}, {"k", f.k}};
}

FieldConfig field_from_json(const json& j, const std::string& path) {
    long p = int_field(field(j, "p", path), path + "/p");
    long k = int_field(field(j, "k", path), path + "/k");
    try {
        return FieldConfig::make(p, static_cast<int>(k));
    } catch (const InvalidInput& e) {
        bad(path, e.what());
    }
}

json to_json(const FieldElement& e) {
    json coeffs = json::array();
    for (const auto& c : e.coeffs()) coeffs.push_back(rat_json(c));
    return json{{"coeffs", coeffs}};
}

FieldElement element_from_json(FieldConfig f, const json& j, const std::string& path) {
    const json& coeffs = field(j, "coeffs", path);
    if (!coeffs.is_array() || coeffs.size() != static_cast<size_t>(f.k))
        bad(path + "/coeffs", "expected an array of length k = " + std::to_string(f.k));
    std::vector<Rat> c;
    for (size_t i = 0; i < coeffs.size(); ++i)
        c.push_back(rat_from(coeffs[i], path + "/coeffs/" + std::to_string(i)));
    return FieldElement(f, std::move(c));
}

namespace {

KMatrix alpha_from_json(FieldConfig f, const json& j, size_t rows, size_t cols,
                        const std::string& path) {
    if (!j.is_array() || j.size() != rows)
        bad(path, "expected " + std::to_string(rows) + " rows");
    KMatrix a(f, rows, cols);
    for (size_t i = 0; i < rows; ++i) {
        const json& row = j[i];
        std::string rpath = path + "/" + std::to_string(i);
        if (!row.is_array() || row.size() != cols)
            bad(rpath, "expected " + std::to_string(cols) + " entries");
        for (size_t jj = 0; jj < cols; ++jj)
            a.at(i, jj) = element_from_json(f, row[jj], rpath + "/" + std::to_string(jj));
    }
    return a;
}

json alpha_to_json(const KMatrix& a) {
    json rows = json::array();
    for (size_t i = 0; i < a.rows(); ++i) {
        json row = json::array();
        for (size_t j = 0; j < a.cols(); ++j) row.push_back(to_json(a.at(i, j)));
        rows.push_back(row);
    }
    return rows;
}

} // namespace

json to_json(const IntegralHTModule& x) {
    return json{{"field", to_json(x.field)},
                {"rank", x.n},
                {"omega_rank", x.r()},
                {"alpha", alpha_to_json(x.alpha)}};
}

IntegralHTModule integral_from_json_unchecked(const json& j, const std::string& path) {
    FieldConfig f = field_from_json(field(j, "field", path), path + "/field");
    long n = int_field(field(j, "rank", path), path + "/rank");
    long r = int_field(field(j, "omega_rank", path), path + "/omega_rank");
    if (n < 0) bad(path + "/rank", "rank must be >= 0");
    if (r < 0 || r > n) bad(path + "/omega_rank", "omega_rank must lie in [0, rank]");
    KMatrix a = alpha_from_json(f, field(j, "alpha", path), static_cast<size_t>(r),
                                static_cast<size_t>(n), path + "/alpha");
    IntegralHTModule x;
    x.field = f;
    x.n = static_cast<int>(n);
    x.alpha = std::move(a);
    return x;
}

IntegralHTModule integral_from_json(const json& j, const std::string& path) {
    IntegralHTModule x = integral_from_json_unchecked(j, path);
    auto d = validate(x);
    if (!d.ok) bad(path, "invalid integral module: " + d.issues[0]);
    return x;
}

json to_json(const TorsionHTModule& x) {
    json type = json::array();
    for (int e : x.cyclic_type) type.push_back(e);
    json divs = json::array();
    for (const auto& d : x.omega.divisors) divs.push_back(rat_json(d));
    return json{{"field", to_json(x.field)},
                {"cyclic_type", type},
                {"omega_divisors", divs},
                {"alpha", alpha_to_json(x.alpha)}};
}

TorsionHTModule torsion_from_json(const json& j, const std::string& path) {
    FieldConfig f = field_from_json(field(j, "field", path), path + "/field");
    const json& type = field(j, "cyclic_type", path);
    if (!type.is_array()) bad(path + "/cyclic_type", "expected an array");
    std::vector<int> ct;
    for (size_t i = 0; i < type.size(); ++i)
        ct.push_back(static_cast<int>(int_field(type[i], path + "/cyclic_type/" +
                                                std::to_string(i))));
    const json& divs = field(j, "omega_divisors", path);
    if (!divs.is_array()) bad(path + "/omega_divisors", "expected an array");
    std::vector<Rat> dv;
    for (size_t i = 0; i < divs.size(); ++i)
        dv.push_back(rat_from(divs[i], path + "/omega_divisors/" + std::to_string(i)));
    KMatrix a = alpha_from_json(f, field(j, "alpha", path), dv.size(), ct.size(),
                                path + "/alpha");
    try {
        return TorsionHTModule::make(f, std::move(ct), std::move(dv), std::move(a));
    } catch (const InvalidInput& e) {
        bad(path, e.what());
    }
}

bool json_is_torsion_module(const json& j) {
    return j.is_object() && j.contains("cyclic_type");
}

json to_json(const SlopeData& d) {
    json comps = json::array();
    for (const auto& [dd, hh] : d.components) comps.push_back({dd, hh});
    return json{{"components", comps}};
}

SlopeData slopedata_from_json(const json& j, const std::string& path) {
    const json& comps = field(j, "components", path);
    if (!comps.is_array()) bad(path + "/components", "expected an array");
    std::vector<std::pair<long, long>> out;
    for (size_t i = 0; i < comps.size(); ++i) {
        const json& c = comps[i];
        std::string cpath = path + "/components/" + std::to_string(i);
        if (!c.is_array() || c.size() != 2) bad(cpath, "expected [dim, height]");
        out.emplace_back(int_field(c[0], cpath + "/0"), int_field(c[1], cpath + "/1"));
    }
    try {
        return SlopeData::make(std::move(out));
    } catch (const InvalidInput& e) {
        bad(path + "/components", e.what());
    }
}

json to_json(const StratumLabel& l) {
    json nu = json::array();
    for (const auto& v : l.nu) nu.push_back(rat_json(v));
    return json{{"nu", nu}};
}

StratumLabel label_from_json(const json& j, const std::string& path) {
    const json& nu = field(j, "nu", path);
    if (!nu.is_array()) bad(path + "/nu", "expected an array");
    std::vector<Rat> v;
    for (size_t i = 0; i < nu.size(); ++i)
        v.push_back(rat_from(nu[i], path + "/nu/" + std::to_string(i)));
    try {
        return StratumLabel::make(std::move(v));
    } catch (const InvalidInput& e) {
        bad(path + "/nu", e.what());
    }
}

json subgroup_json(const Subgroup& s) {
    // generators as rational vectors modulo T: coordinates a_j / p^{e_j}
    json gens = json::array();
    Int p(s.p());
    for (const auto& g : s.generators()) {
        json vec = json::array();
        for (size_t j = 0; j < g.size(); ++j) {
            Int den;
            mpz_pow_ui(den.get_mpz_t(), p.get_mpz_t(),
                       static_cast<unsigned long>(s.ambient_type()[j]));
            Rat q(g[j], den);
            q.canonicalize();
            vec.push_back(rat_json(q));
        }
        gens.push_back(vec);
    }
    return json{{"level", s.ambient_type().empty() ? 0 : s.ambient_type()[0]},
                {"generators", gens},
                {"height", s.height()}};
}

json to_json(const DescentTrace& t) {
    json steps = json::array();
    for (const auto& s : t.steps) {
        json step;
        step["mu_max"] = rat_json(s.mu_max);
        switch (s.kind) {
            case DescentStep::Kind::AlreadySemistable:
                step["kind"] = "done";
                break;
            case DescentStep::Kind::Isogeny:
                step["kind"] = "isogeny";
                step["lattice"] = subgroup_json(s.lattice);
                break;
            case DescentStep::Kind::PDivisible: {
                step["kind"] = "pdivisible";
                json basis = json::array();
                for (size_t j = 0; j < s.sub_basis.cols(); ++j) {
                    json col = json::array();
                    for (size_t i = 0; i < s.sub_basis.rows(); ++i)
                        col.push_back(s.sub_basis.at(i, j).get_str());
                    basis.push_back(col);
                }
                step["sub"] = json{{"basis", basis}, {"module", to_json(s.sub)}};
                break;
            }
            default:
                step["kind"] = "needs-deeper-tower";
        }
        step["module"] = to_json(s.module_before);
        steps.push_back(step);
    }
    json gradeds = json::array();
    for (const auto& g : t.gradeds)
        gradeds.push_back({{"rank", g.rank}, {"slope", rat_json(g.slope)}});
    json out{{"status", t.status == DescentTrace::Status::Done ? "done" : "horizon-exhausted"},
             {"steps", steps},
             {"final", to_json(t.final_module)},
             {"gradeds", gradeds},
             {"certified", t.certified}};
    if (t.status == DescentTrace::Status::Done) {
        out["hn"] = to_json(t.hn);
        out["hn_nr"] = to_json(t.hn_nr);
        out["mu_infty"] = rat_json(t.mu_infty);
    }
    if (!t.notes.empty()) out["notes"] = t.notes;
    return out;
}

json to_json(const LeviData& l) {
    json slopes = json::array();
    for (const auto& s : l.slopes) slopes.push_back(rat_json(s));
    return json{{"heights", l.heights}, {"slopes", slopes}, {"omega_ranks", l.omega_ranks}};
}

json to_json(const NewtonCheckReport& r) {
    json out{{"hodge_ok", r.hodge_ok}, {"passed", r.passed()}};
    if (r.newton_checked) {
        out["newton_ok"] = r.newton_ok;
        out["equality_with_newton"] = r.equality_with_newton;
        if (r.isoclinic) out["isoclinic_line_ok"] = r.isoclinic_line_ok;
    }
    if (!r.witness.empty()) out["witness"] = r.witness;
    return out;
}

json to_json(const ClassifyResult& r) {
    json out{{"hn_label", to_json(r.hn_label)}, {"containment_ok", r.containment_ok}};
    if (r.newton_label) out["newton_label"] = to_json(*r.newton_label);
    if (!r.witness.empty()) out["witness"] = r.witness;
    return out;
}

json to_json(const ConvergenceReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"n", row.n}, {"rescaled", to_json(row.rescaled)},
                        {"geq_hn", row.geq_hn}});
    return json{{"rows", rows},
                {"all_geq", r.all_geq},
                {"chains_non_increasing", r.chains_non_increasing},
                {"hn", to_json(r.hn)}};
}

} // namespace hn::io
