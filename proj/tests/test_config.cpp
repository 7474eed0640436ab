#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "magweyl/config.hpp"

using namespace magweyl;

namespace {

const char* kHeadline = R"({
  "problem": {
    "d": 3,
    "metric": "identity",
    "field": {"planes": [[0, 1, 1.0]]},
    "potential": {"constant": -1.0, "terms": [{"coeff": 1.0, "powers": [0, 0, 2]}]},
    "mu": 2.0,
    "h": 0.125,
    "smoothness": {"l": 2, "sigma": 0},
    "cutoff": {"center": [0, 0, 0], "radius": 0.7, "order": 4}
  },
  "oracle": {
    "route": "separable",
    "separable": {"plane_lengths": [4.0], "interval": [-2.2, 2.2], "points_1d": 900, "tau_max": 0.4},
    "points_per_h": 40
  },
  "sweep": {
    "mu_rule": {"type": "power_of_h", "exponent": -0.3333333333333333},
    "h_list": [0.125, 0.0625],
    "tau": 0.0,
    "bound": "weak",
    "bound_params": {"r": 1, "q": 1}
  },
  "constants": {"C": {"bound": 1.0}, "eps": {"eps0": 1e-8, "eps_group": 1e-6}},
  "output": {"csv_path": "", "json_path": ""}
})";

}  // namespace

TEST_CASE("full config document resolves") {
    auto doc = parse_config_text(kHeadline);
    CHECK(doc.experiment.spec.d == 3);
    CHECK(doc.experiment.spec.field(0, 1) == 1.0);
    CHECK(doc.experiment.spec.field(1, 0) == -1.0);
    CHECK(doc.experiment.spec.potential(Vector::Zero(3)) == -1.0);
    Vector z = Vector::Zero(3);
    z[2] = 0.5;
    CHECK(doc.experiment.spec.potential(z) == doctest::Approx(-0.75));
    CHECK(doc.experiment.route == OracleRoute::separable);
    CHECK(doc.experiment.separable.points_1d == 900);
    REQUIRE(doc.sweep_points.size() == 2);
    CHECK(doc.sweep_points[0].second == 0.125);
    CHECK(doc.sweep_points[0].first == doctest::Approx(std::pow(0.125, -1.0 / 3)));
    CHECK(doc.experiment.bound_id == "weak");
    CHECK(doc.experiment.bound_base.q == 1);
}

TEST_CASE("unknown keys are rejected by name") {
    SUBCASE("top level") {
        try {
            parse_config_text(R"({"problem": {"d": 3}, "bogus": 1})");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("bogus") != std::string::npos);
        }
    }
    SUBCASE("nested") {
        try {
            parse_config_text(R"({"problem": {"d": 3, "typo_field": 1}})");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("typo_field") != std::string::npos);
        }
    }
}

TEST_CASE("malformed JSON raises ConfigError") {
    CHECK_THROWS_AS(parse_config_text("{ not json"), ConfigError);
}

TEST_CASE("physical validation happens at parse time") {
    // skew violation: planes construction cannot break skewness, so pass a matrix
    const char* text = R"({
      "problem": {"d": 3, "field": {"matrix": [[0, 1, 0], [-0.5, 0, 0], [0, 0, 0]]},
                   "mu": 2.0, "h": 0.1}
    })";
    CHECK_THROWS(parse_config_text(text));
}

TEST_CASE("resolved config is deterministic and echoes defaults") {
    auto doc1 = parse_config_text(kHeadline);
    auto doc2 = parse_config_text(kHeadline);
    const std::string a = resolved_config_json(doc1);
    const std::string b = resolved_config_json(doc2);
    CHECK(a == b);
    CHECK(a.find("\"route\": \"separable\"") != std::string::npos);
    CHECK(a.find("\"bound\": \"weak\"") != std::string::npos);
    CHECK(a.find("eps_group") != std::string::npos);
}

TEST_CASE("fixed_muh rule and mu_list broadcast") {
    const char* text = R"({
      "problem": {"d": 3, "field": {"planes": [[0, 1, 1.0]]}, "mu": 2.0, "h": 0.1},
      "sweep": {"mu_rule": {"type": "fixed_muh", "value": 0.5}, "h_list": [0.1, 0.05]}
    })";
    auto doc = parse_config_text(text);
    REQUIRE(doc.sweep_points.size() == 2);
    CHECK(doc.sweep_points[0].first == doctest::Approx(5.0));
    CHECK(doc.sweep_points[1].first == doctest::Approx(10.0));
}
