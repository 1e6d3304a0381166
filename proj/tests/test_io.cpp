#include <algorithm>
#include <string>

#include <catch2/catch_amalgamated.hpp>

#include "coopcache/scenario_io.hpp"

using namespace coopcache;

namespace {

std::string two_group_zipf(const std::string& extra = "") {
    return R"({
  "version": 1,
  "range_d": 5.0,
  "seed": 3,
  "groups": [
    { "density": 0.05, "request": { "zipf": { "F": 6, "gamma_r": 0.9, "permute_seed": 1 } } },
    { "density": 0.05, "request": { "zipf": { "F": 6, "gamma_r": 0.9, "permute_seed": 2 } } }
  ])" + extra +
           "\n}";
}

}  // namespace

TEST_CASE("minimal scenario parses with implied weights") {
    const std::string text = R"({
      "version": 1,
      "range_d": 5.0,
      "groups": [ { "density": 0.05, "request": [0.6, 0.4] } ]
    })";
    const LoadedScenario loaded = parse_scenario_text(text, "test");
    CHECK(loaded.scenario.group_count() == 1);
    CHECK(loaded.scenario.weights == std::vector<double>{1.0});
    CHECK_FALSE(loaded.sim_config.has_value());
}

TEST_CASE("social weights follow the densities") {
    const std::string text = R"({
      "version": 1,
      "range_d": 5.0,
      "weights": "social",
      "groups": [
        { "density": 0.01, "request": [0.5, 0.5] },
        { "density": 0.03, "request": [0.5, 0.5] },
        { "density": 0.06, "request": [0.5, 0.5] }
      ]
    })";
    const LoadedScenario loaded = parse_scenario_text(text, "test");
    REQUIRE(loaded.scenario.weights.size() == 3);
    CHECK(loaded.scenario.weights[0] == Catch::Approx(0.1).epsilon(1e-12));
    CHECK(loaded.scenario.weights[1] == Catch::Approx(0.3).epsilon(1e-12));
    CHECK(loaded.scenario.weights[2] == Catch::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("zipf requests with distinct permute seeds share a multiset") {
    const LoadedScenario loaded =
        parse_scenario_text(two_group_zipf(), "test");
    const Pmf& a = loaded.scenario.groups[0].request;
    const Pmf& b = loaded.scenario.groups[1].request;
    CHECK_FALSE(a == b);
    std::vector<double> sa = a.probs(), sb = b.probs();
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    CHECK(sa == sb);
}

TEST_CASE("unknown keys are rejected at every level") {
    CHECK_THROWS_WITH(
        parse_scenario_text(R"({"version":1,"range_d":5,"groups":[],"extra":1})",
                            "t"),
        Catch::Matchers::ContainsSubstring("extra"));
    CHECK_THROWS_WITH(
        parse_scenario_text(
            R"({"version":1,"range_d":5,
                "groups":[{"density":0.05,"request":[1.0],"typo":2}]})",
            "t"),
        Catch::Matchers::ContainsSubstring("typo"));
    CHECK_THROWS_WITH(
        parse_scenario_text(
            R"({"version":1,"range_d":5,
                "groups":[{"density":0.05,
                           "request":{"zipf":{"F":3,"gamma_r":0.9,"seed":1}}}]})",
            "t"),
        Catch::Matchers::ContainsSubstring("seed"));
}

TEST_CASE("invariant violations name the offending field") {
    CHECK_THROWS_WITH(
        parse_scenario_text(
            R"({"version":1,"range_d":-5,
                "groups":[{"density":0.05,"request":[1.0]}]})",
            "t"),
        Catch::Matchers::ContainsSubstring("range_d"));
    CHECK_THROWS_WITH(
        parse_scenario_text(
            R"({"version":1,"range_d":5,
                "groups":[{"density":0.05,"request":[1.0,0.0]}]})",
            "t"),
        Catch::Matchers::ContainsSubstring("request"));
    CHECK_THROWS_WITH(
        parse_scenario_text(
            R"({"version":1,"range_d":5,"weights":[0.4,0.4],
                "groups":[{"density":0.05,"request":[0.5,0.5]},
                          {"density":0.05,"request":[0.5,0.5]}]})",
            "t"),
        Catch::Matchers::ContainsSubstring("weights"));
    CHECK_THROWS_WITH(
        parse_scenario_text(R"({"version":2,"range_d":5,"groups":[]})", "t"),
        Catch::Matchers::ContainsSubstring("version"));
}

TEST_CASE("parse errors report the location") {
    const std::string broken = "{\n  \"version\": 1,\n  \"range_d\": oops\n}";
    CHECK_THROWS_WITH(parse_scenario_text(broken, "t"),
                      Catch::Matchers::ContainsSubstring("line 3"));
}

TEST_CASE("simulation block round trip") {
    const std::string text = R"({
      "version": 1,
      "range_d": 5.0,
      "seed": 9,
      "groups": [
        { "fixed_count": 200, "request": [0.5, 0.5] },
        { "density": 0.03, "fixed_count": 300, "request": [0.4, 0.6] }
      ],
      "simulation": {
        "area_side": 100.0, "slots": 20, "step_len": 1.0,
        "placement": "fixed_counts"
      }
    })";
    const LoadedScenario loaded = parse_scenario_text(text, "test");
    REQUIRE(loaded.sim_config.has_value());
    CHECK(loaded.sim_config->slots == 20);
    CHECK(loaded.sim_config->placement == sim::Placement::fixed_counts);
    CHECK(loaded.sim_config->seed == 9);
    // density derived from fixed_count / area^2 when omitted
    CHECK(loaded.scenario.groups[0].density ==
          Catch::Approx(200.0 / 1e4).epsilon(1e-12));
    CHECK(loaded.scenario.groups[1].density == 0.03);
}

TEST_CASE("density is required without a simulation area") {
    CHECK_THROWS_WITH(
        parse_scenario_text(
            R"({"version":1,"range_d":5,
                "groups":[{"fixed_count":10,"request":[1.0]}]})",
            "t"),
        Catch::Matchers::ContainsSubstring("density"));
}

TEST_CASE("caching profiles round trip through json") {
    CachingProfile caching;
    caching.per_group = {Pmf({0.125, 0.875}), Pmf({0.6, 0.4})};
    const json doc = caching_to_json(caching);
    const CachingProfile back = caching_from_json(doc);
    REQUIRE(back.group_count() == 2);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(back.per_group[k] == caching.per_group[k]);
    }
    const json wrapped{{"caching", doc}};
    CHECK(caching_from_json(wrapped).per_group[0] == caching.per_group[0]);
    CHECK_THROWS_AS(caching_from_json(json::array()), ScenarioError);
}

TEST_CASE("trace csv uses ten significant digits") {
    sim::UtilityTrace trace;
    trace.per_slot = {{0.12345678949999, 1.0}, {0.5, 0.0}};
    const std::string csv = trace_to_csv(trace);
    CHECK(csv == "slot,group1,group2\n"
                 "1,0.1234567895,1\n"
                 "2,0.5,0\n");
}
