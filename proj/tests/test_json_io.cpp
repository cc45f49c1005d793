#include "doctest.h"

#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "hn/json_io.hpp"
#include "hn/svg.hpp"
#include "oracles.hpp"

using namespace hn;
using namespace hn::testing;
using hn::io::json;

TEST_CASE("rational strings") {
    CHECK(rat_from_string("3/2") == rat(3, 2));
    CHECK(rat_from_string("-7") == Rat(-7));
    CHECK(rat_from_string("4/6") == rat(2, 3)); // canonicalized
    CHECK(rat_to_string(rat(2, 4)) == "1/2");
    CHECK(rat_to_string(Rat(5)) == "5");
    CHECK_THROWS_AS(rat_from_string("1.5"), InvalidInput);
    CHECK_THROWS_AS(rat_from_string(""), InvalidInput);
    CHECK_THROWS_AS(rat_from_string("x"), InvalidInput);
    CHECK_THROWS_AS(rat_from_string("1/0"), InvalidInput);
}

TEST_CASE("polygon json and csv round trips") {
    std::mt19937 rng(401);
    for (int t = 0; t < 50; ++t) {
        auto p = random_polygon(rng);
        CHECK(io::polygon_from_json(io::to_json(p)) == p);
        CHECK(io::polygon_from_csv(io::polygon_csv(p)) == p);
        // parse -> serialize -> parse is a fixed point
        auto j1 = io::to_json(io::polygon_from_json(io::to_json(p)));
        CHECK(j1 == io::to_json(p));
    }
    // integers allowed without denominators
    auto j = json::parse(R"({"breakpoints": [[0, 0], [1, "1"], ["2", 1]]})");
    auto p = io::polygon_from_json(j);
    CHECK(p.eval(Rat(2)) == 1);
}

TEST_CASE("schema violations carry pointer paths") {
    auto bad = json::parse(R"({"breakpoints": [["0","0"],["1","oops"]]})");
    try {
        io::polygon_from_json(bad);
        FAIL("expected InvalidInput");
    } catch (const InvalidInput& e) {
        CHECK(std::string(e.what()).find("/breakpoints/1/1") != std::string::npos);
    }
    auto bad2 = json::parse(R"({"field": {"p": 2, "k": 2}, "rank": 2, "omega_rank": 1,
                                "alpha": [[{"coeffs": ["1"]}, {"coeffs": ["0","1"]}]]})");
    try {
        io::integral_from_json(bad2);
        FAIL("expected InvalidInput");
    } catch (const InvalidInput& e) {
        CHECK(std::string(e.what()).find("/alpha/0/0") != std::string::npos);
    }
    CHECK_THROWS_AS(io::field_from_json(json::parse(R"({"p": 4, "k": 1})")), InvalidInput);
}

TEST_CASE("module json round trips") {
    for (auto x : {make_x1(), make_x2(), make_x3(), make_x4()}) {
        auto y = io::integral_from_json(io::to_json(x));
        CHECK(y.alpha == x.alpha);
        CHECK(y.n == x.n);
        auto t = truncate(x, 2);
        auto t2 = io::torsion_from_json(io::to_json(t));
        CHECK(t2.alpha == t.alpha);
        CHECK(t2.cyclic_type == t.cyclic_type);
        CHECK(t2.omega.divisors == t.omega.divisors);
    }
    CHECK(io::json_is_torsion_module(io::to_json(truncate(make_x1(), 1))));
    CHECK_FALSE(io::json_is_torsion_module(io::to_json(make_x1())));
}

TEST_CASE("slope data and labels round trip") {
    auto d = SlopeData::make({{0, 1}, {1, 2}});
    auto d2 = io::slopedata_from_json(io::to_json(d));
    CHECK(d2.components == d.components);

    auto l = StratumLabel::make({Rat(1), rat(1, 2), rat(1, 2), Rat(0)});
    CHECK(io::label_from_json(io::to_json(l)) == l);
    auto j = json::parse(R"({"nu": ["1", "1/2", "1/2", "0"]})");
    CHECK(io::label_from_json(j) == l);
}

TEST_CASE("trace json shape") {
    auto tr = run_descent(make_x2());
    auto j = io::to_json(tr);
    CHECK(j["status"] == "done");
    REQUIRE(j["steps"].size() == 2);
    CHECK(j["steps"][0]["kind"] == "isogeny");
    CHECK(j["steps"][0]["mu_max"] == "1");
    CHECK(j["steps"][0]["lattice"]["generators"][0][1] == "1/2"); // p^{-1} e2
    CHECK(j["steps"][1]["kind"] == "done");
    CHECK(j["mu_infty"] == "1/2");
    CHECK(j["certified"] == true);

    auto tr4 = run_descent(make_x4());
    auto j4 = io::to_json(tr4);
    CHECK(j4["steps"][0]["kind"] == "pdivisible");
    CHECK(j4["steps"][0]["sub"]["basis"].size() == 1);
}

TEST_CASE("descent traces match their golden files byte for byte") {
#ifdef HN_FIXTURES_DIR
    auto check_golden = [](const IntegralHTModule& x, const std::string& name) {
        std::ifstream in(std::string(HN_FIXTURES_DIR) + "/golden/" + name);
        REQUIRE(in.good());
        std::stringstream buf;
        buf << in.rdbuf();
        auto trace = run_descent(x);
        CHECK(io::to_json(trace).dump(2) == buf.str());
    };
    check_golden(make_x2(), "x2_trace.json");
    check_golden(make_x4(), "x4_trace.json");
    // the rank-3 fixture, loaded through the io path
    std::ifstream fin(std::string(HN_FIXTURES_DIR) + "/x5.json");
    REQUIRE(fin.good());
    json fixture;
    fin >> fixture;
    check_golden(io::integral_from_json(fixture["module"]), "x5_trace.json");
#endif
}

TEST_CASE("svg emission is plausible and deterministic") {
    auto p = hn_polygon_torsion(truncate(make_x2(), 1));
    auto svg = polygon_svg(p);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK(svg.find("(2,1)") != std::string::npos); // rational label
    CHECK(svg == polygon_svg(p));
}
