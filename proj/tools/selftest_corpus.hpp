#pragma once

// Bundled worked-example corpus for `hn selftest`: the rank-2 family over
// Q(2^{1/2}) plus the strata fixtures, with their expected exact values.

#include "hn/json_io.hpp"

namespace hn::corpus {

inline io::json fixture_x1() {
    return io::json::parse(R"({
      "name": "x1-semistable",
      "module": {"field": {"p": 2, "k": 2}, "rank": 2, "omega_rank": 1,
                 "alpha": [[{"coeffs": ["1", "0"]}, {"coeffs": ["0", "1"]}]]},
      "expect": {
        "validate": true,
        "semistable": true,
        "type_hn": true,
        "hn": {"breakpoints": [["0", "0"], ["2", "1"]]},
        "step_kinds": ["done"],
        "mu_infty": "1/2"
      }
    })");
}

inline io::json fixture_x2() {
    return io::json::parse(R"({
      "name": "x2-isogeny-step",
      "module": {"field": {"p": 2, "k": 2}, "rank": 2, "omega_rank": 1,
                 "alpha": [[{"coeffs": ["1", "0"]}, {"coeffs": ["0", "2"]}]]},
      "expect": {
        "validate": true,
        "semistable": false,
        "type_hn": false,
        "hn": {"breakpoints": [["0", "0"], ["2", "1"]]},
        "level1_hn": {"breakpoints": [["0", "0"], ["1", "1"], ["2", "1"]]},
        "step_kinds": ["isogeny", "done"],
        "mu_infty": "1/2",
        "convergence_at_1": ["1", "3/4", "2/3", "5/8"],
        "newton_claim": {"components": [[1, 2]]},
        "newton_equality": true
      }
    })");
}

inline io::json fixture_x3() {
    return io::json::parse(R"({
      "name": "x3-split-ordinary",
      "module": {"field": {"p": 2, "k": 2}, "rank": 2, "omega_rank": 1,
                 "alpha": [[{"coeffs": ["0", "0"]}, {"coeffs": ["1", "0"]}]]},
      "expect": {
        "validate": true,
        "semistable": false,
        "type_hn": true,
        "hn": {"breakpoints": [["0", "0"], ["1", "1"], ["2", "1"]]},
        "step_kinds": ["pdivisible", "done"],
        "mu_infty": "1",
        "newton_claim": {"components": [[0, 1], [1, 1]]},
        "newton_equality": true
      }
    })");
}

inline io::json fixture_x4() {
    return io::json::parse(R"({
      "name": "x4-pdivisible-step",
      "module": {"field": {"p": 2, "k": 2}, "rank": 2, "omega_rank": 1,
                 "alpha": [[{"coeffs": ["2", "0"]}, {"coeffs": ["1", "0"]}]]},
      "expect": {
        "validate": true,
        "semistable": false,
        "type_hn": true,
        "hn": {"breakpoints": [["0", "0"], ["1", "1"], ["2", "1"]]},
        "step_kinds": ["pdivisible", "done"],
        "mu_infty": "1",
        "newton_claim": {"components": [[0, 1], [1, 1]]},
        "newton_equality": true
      }
    })");
}

inline io::json fixture_x5() {
    return io::json::parse(R"({
      "name": "x5-rank3-mixed-path",
      "module": {"field": {"p": 3, "k": 2}, "rank": 3, "omega_rank": 1,
                 "alpha": [[{"coeffs": ["1", "0"]}, {"coeffs": ["0", "3"]},
                            {"coeffs": ["9", "0"]}]]},
      "expect": {
        "validate": true,
        "semistable": false,
        "type_hn": false,
        "hn": {"breakpoints": [["0", "0"], ["1", "1"], ["3", "2"]]},
        "level1_hn": {"breakpoints": [["0", "0"], ["2", "2"], ["3", "2"]]},
        "step_kinds": ["pdivisible", "isogeny", "done"],
        "mu_infty": "1",
        "newton_claim": {"components": [[1, 1], [1, 2]]},
        "newton_equality": true
      }
    })");
}

inline std::vector<io::json> bundled_fixtures() {
    return {fixture_x1(), fixture_x2(), fixture_x3(), fixture_x4(), fixture_x5()};
}

} // namespace hn::corpus
