// hn: exact Harder-Narasimhan polygon calculus for Hodge-Tate modules.
// Tropical polygon algebra, valued-field lattice reduction, descent traces,
// Newton/Hodge comparison checkers, and stratification combinatorics.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "hn/descent.hpp"
#include "hn/json_io.hpp"
#include "hn/newton.hpp"
#include "hn/strata.hpp"
#include "hn/svg.hpp"
#include "selftest_corpus.hpp"

using namespace hn;
using io::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitInvalidInput = 2;
constexpr int kExitResource = 3;

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidInput("'" + path + "': " + e.what());
    }
    return j;
}

void write_output(const std::string& content, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << content;
        if (!content.empty() && content.back() != '\n') std::cout << "\n";
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw InvalidInput("cannot write '" + out_path + "'");
    out << content;
}

std::string dump(const json& j) { return j.dump(2); }

// Module files may be bare module JSON or a fixture wrapper {"module": ...}.
json unwrap_module(json j) {
    if (j.is_object() && j.contains("module") && !j.contains("field")) return j["module"];
    return j;
}

std::vector<Rat> parse_rat_csv(const std::string& s) {
    std::vector<Rat> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(rat_from_string(tok));
    return out;
}

// ---------------------------------------------------------------------------
// selftest

struct SelfTestOutcome {
    int ran = 0;
    int failed = 0;
};

void selftest_one(const json& fixture, SelfTestOutcome& outcome) {
    std::string name = fixture.value("name", std::string("unnamed"));
    const json& expect = fixture.at("expect");
    auto check = [&](const std::string& what, bool ok) {
        ++outcome.ran;
        if (!ok) ++outcome.failed;
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << ": " << what << "\n";
    };
    IntegralHTModule x = io::integral_from_json_unchecked(fixture.at("module"), "/module");
    bool valid = validate(x).ok;
    if (expect.contains("validate")) check("validate", valid == expect["validate"].get<bool>());
    if (!valid) return;
    if (expect.contains("semistable"))
        check("semistable", is_semistable(x) == expect["semistable"].get<bool>());
    DescentTrace trace = run_descent(x);
    bool done = trace.status == DescentTrace::Status::Done && trace.certified;
    check("descent terminates certified", done);
    if (!done) return;
    if (expect.contains("hn"))
        check("hn polygon", trace.hn == io::polygon_from_json(expect["hn"], "/expect/hn"));
    if (expect.contains("level1_hn"))
        check("level-1 polygon",
              hn_polygon_torsion(truncate(x, 1)) ==
                  io::polygon_from_json(expect["level1_hn"], "/expect/level1_hn"));
    if (expect.contains("type_hn"))
        check("type-HN predicate", is_type_hn(x) == expect["type_hn"].get<bool>());
    if (expect.contains("step_kinds")) {
        std::vector<std::string> kinds;
        for (const auto& s : trace.steps) {
            switch (s.kind) {
                case DescentStep::Kind::AlreadySemistable: kinds.push_back("done"); break;
                case DescentStep::Kind::Isogeny: kinds.push_back("isogeny"); break;
                case DescentStep::Kind::PDivisible: kinds.push_back("pdivisible"); break;
                default: kinds.push_back("?");
            }
        }
        check("step kinds", kinds == expect["step_kinds"].get<std::vector<std::string>>());
    }
    if (expect.contains("mu_infty"))
        check("mu_infty", trace.mu_infty == io::rat_from(expect["mu_infty"], "/expect/mu_infty"));
    if (expect.contains("convergence_at_1")) {
        const auto& vals = expect["convergence_at_1"];
        auto rep = empirical_convergence(x, static_cast<int>(vals.size()), 32,
                                         std::max(subgroup_enum_bound(), 8L));
        bool ok = rep.all_geq && rep.chains_non_increasing &&
                  rep.rows.size() == vals.size();
        for (size_t i = 0; ok && i < vals.size(); ++i)
            ok = rep.rows[i].rescaled.eval(Rat(1)) ==
                 io::rat_from(vals[i], "/expect/convergence_at_1");
        check("convergence values at x=1", ok);
    }
    if (expect.contains("newton_claim")) {
        auto claim = io::slopedata_from_json(expect["newton_claim"], "/expect/newton_claim");
        auto rep = check_bounds(trace.hn, claim, x.n - x.r(), x.n);
        bool ok = rep.passed();
        if (expect.contains("newton_equality"))
            ok = ok && rep.equality_with_newton == expect["newton_equality"].get<bool>();
        check("newton comparison", ok);
    }
}

int run_selftest(const std::string& corpus_dir) {
    std::vector<json> fixtures;
    if (corpus_dir.empty()) {
        fixtures = corpus::bundled_fixtures();
    } else {
        std::vector<std::filesystem::path> paths;
        if (!std::filesystem::is_directory(corpus_dir))
            throw InvalidInput("corpus directory '" + corpus_dir + "' does not exist");
        for (const auto& entry : std::filesystem::directory_iterator(corpus_dir))
            if (entry.path().extension() == ".json") paths.push_back(entry.path());
        std::sort(paths.begin(), paths.end());
        for (const auto& p : paths) fixtures.push_back(read_json_file(p.string()));
        if (fixtures.empty()) throw InvalidInput("corpus directory '" + corpus_dir + "' is empty");
    }
    SelfTestOutcome outcome;
    for (const auto& f : fixtures) selftest_one(f, outcome);

    // strata fixtures
    auto scheck = [&](const std::string& what, bool ok) {
        ++outcome.ran;
        if (!ok) ++outcome.failed;
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << "strata: " << what << "\n";
    };
    if (corpus_dir.empty()) {
        auto e21 = enumerate_nu(2, 1);
        scheck("enumerate (2,1)",
               e21.size() == 2 && e21[1] == nu_ss(2, 1));
        scheck("dim at nu_ss(2,1) is 1", stratum_dim(nu_ss(2, 1), 1) == 1);
        scheck("dim at mu is 0",
               stratum_dim(StratumLabel::make({Rat(1), Rat(0)}), 1) == 0);
        auto levi = levi_data(StratumLabel::make({Rat(1), Rat(1), rat(1, 2), rat(1, 2), Rat(0)}));
        scheck("levi blocks", levi.heights == std::vector<long>{2, 4, 5} &&
                                  levi.omega_ranks == std::vector<long>{0, 1, 1});
        scheck("hecke labels (2,2)", hecke_labels(2, 2).size() == 3);
    }

    std::cout << (outcome.failed == 0 ? "selftest: all " : "selftest: FAILED ")
              << (outcome.failed == 0 ? std::to_string(outcome.ran) + " checks passed"
                                      : std::to_string(outcome.failed) + " of " +
                                            std::to_string(outcome.ran) + " checks")
              << "\n";
    return outcome.failed == 0 ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------------------

int dispatch(CLI::App& app, int argc, char** argv);

} // namespace

int main(int argc, char** argv) {
    if (const char* bound = std::getenv("HN_ENUM_BOUND")) {
        try {
            set_subgroup_enum_bound(std::stol(bound));
        } catch (...) {
            std::cerr << "invalid HN_ENUM_BOUND\n";
            return kExitInvalidInput;
        }
    }
    if (const char* guard = std::getenv("HN_BITS_GUARD")) {
        try {
            set_bits_guard(static_cast<size_t>(std::stoull(guard)));
        } catch (...) {
            std::cerr << "invalid HN_BITS_GUARD\n";
            return kExitInvalidInput;
        }
    }
    CLI::App app{"exact Harder-Narasimhan polygons, Hodge-Tate module descent, "
                 "and stratification combinatorics"};
    app.require_subcommand(1);
    try {
        return dispatch(app, argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalidInput;
    } catch (const ResourceError& e) {
        std::cerr << "resource bound: " << e.what() << "\n";
        return kExitResource;
    } catch (const InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (const ArithmeticError& e) {
        std::cerr << "arithmetic error: " << e.what() << "\n";
        return kExitInvalidInput;
    }
}

namespace {

struct PolygonOut {
    std::string json_path, csv_path, svg_path;
    bool to_stdout_csv = false;
    void add_flags(CLI::App* cmd) {
        cmd->add_option("--json", json_path, "write polygon JSON to this path");
        cmd->add_option("--csv", csv_path, "write polygon CSV to this path");
        cmd->add_option("--svg", svg_path, "write an SVG plot to this path");
        cmd->add_flag("--csv-stdout", to_stdout_csv, "print CSV instead of JSON");
    }
    void emit(const ConcavePolygon& p) const {
        bool wrote = false;
        if (!json_path.empty()) { write_output(dump(io::to_json(p)), json_path); wrote = true; }
        if (!csv_path.empty()) { write_output(io::polygon_csv(p), csv_path); wrote = true; }
        if (!svg_path.empty()) { write_output(polygon_svg(p), svg_path); wrote = true; }
        if (!wrote) write_output(to_stdout_csv ? io::polygon_csv(p) : dump(io::to_json(p)), "");
    }
};

int dispatch(CLI::App& app, int argc, char** argv) {
    int exit_code = kExitOk;

    // ---- polygon -----------------------------------------------------------
    auto* poly = app.add_subcommand("polygon", "concave polygon algebra");
    poly->require_subcommand(1);

    static std::string a_path, b_path, lambda_str, ht_str, dim_str;
    static PolygonOut pout;

    auto* conv = poly->add_subcommand("conv", "tropical convolution of two polygons");
    conv->add_option("a", a_path)->required();
    conv->add_option("b", b_path)->required();
    pout.add_flags(conv);
    conv->callback([&] {
        auto f = io::polygon_from_json(read_json_file(a_path));
        auto g = io::polygon_from_json(read_json_file(b_path));
        pout.emit(tropical_convolve(f, g));
    });

    auto* leg = poly->add_subcommand("legendre", "tropical Legendre transform at lambda");
    leg->add_option("f", a_path)->required();
    leg->add_option("--lambda", lambda_str, "rational slope")->required();
    leg->callback([&] {
        auto f = io::polygon_from_json(read_json_file(a_path));
        std::cout << rat_to_string(legendre_transform(f, rat_from_string(lambda_str))) << "\n";
    });

    auto* dual = poly->add_subcommand("dual", "duality flip x -> P(ht-x) - dim + x");
    dual->add_option("f", a_path)->required();
    dual->add_option("--ht", ht_str)->required();
    dual->add_option("--dim", dim_str)->required();
    pout.add_flags(dual);
    dual->callback([&] {
        auto f = io::polygon_from_json(read_json_file(a_path));
        pout.emit(dual_polygon(f, rat_from_string(ht_str), rat_from_string(dim_str)));
    });

    auto* env = poly->add_subcommand("envelope", "concave envelope of a point set");
    env->add_option("points", a_path, "JSON {\"points\": [[x, y], ...]}")->required();
    pout.add_flags(env);
    env->callback([&] {
        json j = read_json_file(a_path);
        if (!j.contains("points") || !j["points"].is_array())
            throw InvalidInput("/points: expected an array");
        std::vector<ConcavePolygon::Point> pts;
        for (size_t i = 0; i < j["points"].size(); ++i) {
            const auto& p = j["points"][i];
            std::string path = "/points/" + std::to_string(i);
            if (!p.is_array() || p.size() != 2) throw InvalidInput(path + ": expected [x, y]");
            pts.push_back({io::rat_from(p[0], path + "/0"), io::rat_from(p[1], path + "/1")});
        }
        pout.emit(concave_envelope(pts));
    });

    auto* cmp = poly->add_subcommand("cmp", "pointwise dominance of polygons with common endpoints");
    cmp->add_option("a", a_path)->required();
    cmp->add_option("b", b_path)->required();
    cmp->callback([&] {
        auto f = io::polygon_from_json(read_json_file(a_path));
        auto g = io::polygon_from_json(read_json_file(b_path));
        std::cout << dominance_str(dominates(f, g)) << "\n";
    });

    auto* plot = poly->add_subcommand("plot", "SVG plot of a polygon");
    plot->add_option("f", a_path)->required();
    pout.add_flags(plot);
    plot->callback([&] {
        auto f = io::polygon_from_json(read_json_file(a_path));
        if (pout.svg_path.empty()) write_output(polygon_svg(f), "");
        else write_output(polygon_svg(f), pout.svg_path);
    });

    // ---- module ------------------------------------------------------------
    auto* mod = app.add_subcommand("module", "Hodge-Tate module operations");
    mod->require_subcommand(1);
    static std::string mod_path, out_path;

    auto* mval = mod->add_subcommand("validate", "check the defining conditions");
    mval->add_option("module", mod_path)->required();
    mval->add_option("--out", out_path);
    mval->callback([&] {
        json j = unwrap_module(read_json_file(mod_path));
        Diagnostics d;
        if (io::json_is_torsion_module(j)) d = validate(io::torsion_from_json(j));
        else d = validate(io::integral_from_json_unchecked(j));
        json rep{{"ok", d.ok}, {"issues", d.issues}};
        write_output(dump(rep), out_path);
        if (!d.ok) exit_code = kExitCheckFailed;
    });

    auto* mmet = mod->add_subcommand("metrics", "deg/dim, ht, mu");
    mmet->add_option("module", mod_path)->required();
    mmet->add_option("--out", out_path);
    mmet->callback([&] {
        json j = unwrap_module(read_json_file(mod_path));
        json rep;
        if (io::json_is_torsion_module(j)) {
            auto m = metrics(io::torsion_from_json(j));
            rep = json{{"deg", io::rat_json(m.deg)}, {"ht", io::rat_json(m.ht)},
                       {"mu", io::rat_json(m.mu)}};
        } else {
            auto m = metrics_rational(io::integral_from_json(j));
            rep = json{{"dim", io::rat_json(m.dim)}, {"ht", io::rat_json(m.ht)},
                       {"mu", io::rat_json(m.mu)}};
        }
        write_output(dump(rep), out_path);
    });

    auto* mhn = mod->add_subcommand("hn", "Harder-Narasimhan polygon");
    mhn->add_option("module", mod_path)->required();
    pout.add_flags(mhn);
    mhn->callback([&] {
        json j = unwrap_module(read_json_file(mod_path));
        ConcavePolygon p = io::json_is_torsion_module(j)
                               ? hn_polygon_torsion(io::torsion_from_json(j))
                               : hn_renormalized(io::integral_from_json(j));
        pout.emit(p);
    });

    auto* mss = mod->add_subcommand("semistable", "semistability predicate");
    mss->add_option("module", mod_path)->required();
    mss->callback([&] {
        json j = unwrap_module(read_json_file(mod_path));
        bool ss = io::json_is_torsion_module(j) ? is_semistable(io::torsion_from_json(j))
                                                : is_semistable(io::integral_from_json(j));
        std::cout << (ss ? "true" : "false") << "\n";
    });

    // ---- descent -----------------------------------------------------------
    auto* desc = app.add_subcommand("descent", "run the descent algorithm");
    static std::string trace_path;
    static int horizon = 32;
    desc->add_option("module", mod_path)->required();
    desc->add_option("--horizon", horizon, "tower and step budget");
    desc->add_option("--trace", trace_path, "write the full trace JSON here");
    desc->add_option("--out", out_path);
    desc->callback([&] {
        auto x = io::integral_from_json(unwrap_module(read_json_file(mod_path)));
        auto trace = run_descent(x, horizon);
        json full = io::to_json(trace);
        if (!trace_path.empty()) write_output(dump(full), trace_path);
        json brief{{"status", full["status"]}, {"certified", trace.certified}};
        if (trace.status == DescentTrace::Status::Done) {
            brief["hn"] = io::to_json(trace.hn);
            brief["hn_nr"] = io::to_json(trace.hn_nr);
            brief["mu_infty"] = io::rat_json(trace.mu_infty);
            brief["steps"] = full["steps"].size();
        }
        write_output(dump(brief), out_path);
        if (trace.status != DescentTrace::Status::Done) exit_code = kExitResource;
    });

    // ---- newton ------------------------------------------------------------
    auto* newt = app.add_subcommand("newton", "Newton/Hodge polygon checkers");
    newt->require_subcommand(1);
    static std::string slopes_path, hn_path;

    auto* nflip = newt->add_subcommand("flip", "concave flip of Newton slope data");
    nflip->add_option("slopes", slopes_path)->required();
    pout.add_flags(nflip);
    nflip->callback([&] {
        auto d = io::slopedata_from_json(read_json_file(slopes_path));
        pout.emit(newt_flip(d));
    });

    auto* ncheck = newt->add_subcommand("check", "verify HN <= Hodge and HN <= Newt flips");
    ncheck->add_option("--hn", hn_path, "HN polygon JSON")->required();
    ncheck->add_option("--slopes", slopes_path, "claimed Newton slope data");
    ncheck->add_option("--out", out_path);
    ncheck->callback([&] {
        auto hn = io::polygon_from_json(read_json_file(hn_path));
        std::optional<SlopeData> d;
        if (!slopes_path.empty()) d = io::slopedata_from_json(read_json_file(slopes_path));
        if (!is_integer(hn.domain_end()) || !is_integer(hn.terminal_value()))
            throw InvalidInput("hn polygon must have integer endpoints");
        long ht = hn.domain_end().get_num().get_si();
        long dim = hn.terminal_value().get_num().get_si();
        auto rep = check_bounds(hn, d, dim, ht);
        write_output(dump(io::to_json(rep)), out_path);
        if (!rep.passed()) exit_code = kExitCheckFailed;
    });

    // ---- strata ------------------------------------------------------------
    auto* strata = app.add_subcommand("strata", "HN stratification combinatorics");
    strata->require_subcommand(1);
    static long n_opt = 0, d_opt = 0, bound_opt = 0;
    static std::string nu_str;
    static bool window_only = false, as_json = false;

    auto* senum = strata->add_subcommand("enum", "enumerate labels with terminal point (n, d)");
    senum->add_option("-n", n_opt)->required();
    senum->add_option("-d", d_opt)->required();
    senum->add_flag("--json", as_json);
    senum->add_option("--out", out_path);
    senum->callback([&] {
        auto labels = enumerate_nu(n_opt, d_opt);
        if (as_json) {
            json arr = json::array();
            for (const auto& l : labels) arr.push_back(io::to_json(l));
            write_output(dump(arr), out_path);
        } else {
            std::ostringstream os;
            for (const auto& l : labels) {
                for (size_t i = 0; i < l.nu.size(); ++i) os << (i ? "," : "") << rat_to_string(l.nu[i]);
                os << "\n";
            }
            write_output(os.str(), out_path);
        }
    });

    auto* sdim = strata->add_subcommand("dim", "stratum dimension <mu - nu, 2 rho>");
    sdim->add_option("-n", n_opt)->required();
    sdim->add_option("-d", d_opt)->required();
    sdim->add_option("--nu", nu_str, "comma-separated rationals")->required();
    sdim->callback([&] {
        auto nu = StratumLabel::make(parse_rat_csv(nu_str));
        if (static_cast<long>(nu.n()) != n_opt) throw InvalidInput("--nu length must equal n");
        std::cout << rat_to_string(stratum_dim(nu, d_opt)) << "\n";
    });

    auto* slevi = strata->add_subcommand("levi", "Levi block data of a label");
    slevi->add_option("--nu", nu_str)->required();
    slevi->add_option("--out", out_path);
    slevi->callback([&] {
        auto nu = StratumLabel::make(parse_rat_csv(nu_str));
        write_output(dump(io::to_json(levi_data(nu))), out_path);
    });

    auto* shecke = strata->add_subcommand("hecke", "normalized Hecke double-coset labels");
    shecke->add_option("-n", n_opt, "vector length h")->required();
    shecke->add_option("--bound", bound_opt, "max a_1")->required();
    shecke->add_flag("--window", window_only, "only labels with a_1 - a_h > h");
    shecke->add_option("--out", out_path);
    shecke->callback([&] {
        std::ostringstream os;
        for (const auto& l : hecke_labels(n_opt, bound_opt)) {
            if (window_only && !l.in_window()) continue;
            for (size_t i = 0; i < l.a.size(); ++i) os << (i ? "," : "") << l.a[i];
            os << "\n";
        }
        write_output(os.str(), out_path);
    });

    auto* sclass = strata->add_subcommand("classify", "HN and Newton labels of a module");
    sclass->add_option("module", mod_path)->required();
    sclass->add_option("--slopes", slopes_path, "claimed Newton slope data");
    sclass->add_option("--out", out_path);
    sclass->callback([&] {
        auto x = io::integral_from_json(unwrap_module(read_json_file(mod_path)));
        std::optional<SlopeData> d;
        if (!slopes_path.empty()) d = io::slopedata_from_json(read_json_file(slopes_path));
        auto res = classify_module(x, d);
        write_output(dump(io::to_json(res)), out_path);
        if (!res.containment_ok) exit_code = kExitCheckFailed;
    });

    // ---- selftest ----------------------------------------------------------
    auto* self = app.add_subcommand("selftest", "run the bundled worked-example corpus");
    static std::string corpus_dir;
    self->add_option("--corpus", corpus_dir, "directory of fixture JSON files");
    self->callback([&] { exit_code = run_selftest(corpus_dir); });

    app.parse(argc, argv);
    return exit_code;
}

} // namespace
