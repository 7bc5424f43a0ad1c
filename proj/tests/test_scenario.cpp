#include <doctest.h>

#include <map>

#include "nadsim/scenario.hpp"

using namespace nadsim;

namespace {

const char* kMinimal = R"({
  "name": "minimal",
  "duration_ns": 1000000000,
  "seed": 1,
  "topology": {
    "nodes": [{"name": "a", "kind": "endpoint"}, {"name": "b", "kind": "endpoint"}],
    "links": [{"a": "a.eth0", "b": "b.eth0", "rate_bps": 1000000000, "propagation_delay_ns": 50}]
  },
  "streams": []
})";

std::string stream_json(const std::string& id, const std::string& src, const std::string& dst,
                        int frame_size = 128) {
    return R"({"id": ")" + id + R"(", "pcp": 0, "source": ")" + src +
           R"(", "destinations": [")" + dst + R"("], "frame_size": )" + std::to_string(frame_size) +
           R"(, "cycle": {"fixed_ns": 1000000}, "shaping_class": "strict_priority"})";
}

std::string two_node_scenario(const std::string& name, const std::string& extra_streams,
                              const std::string& base = "") {
    std::string doc = R"({"name": ")" + name + R"(",)";
    if (!base.empty()) doc += R"("base": ")" + base + R"(",)";
    doc += R"(
  "duration_ns": 1000000000,
  "seed": 7,
  "topology": {
    "nodes": [{"name": "a", "kind": "endpoint"}, {"name": "b", "kind": "endpoint"}],
    "links": [{"a": "a.eth0", "b": "b.eth0", "rate_bps": 1000000000}]
  },
  "streams": [)" + extra_streams + R"(]})";
    return doc;
}

}  // namespace

TEST_CASE("minimal scenario parses to an empty stream list") {
    ScenarioConfig cfg = parse_scenario(kMinimal);
    CHECK(cfg.name == "minimal");
    CHECK(cfg.duration_ns == 1'000'000'000);
    CHECK(cfg.seed == 1);
    CHECK(cfg.streams.empty());
    CHECK(cfg.topology.nodes.size() == 2);
    CHECK(cfg.topology.links.size() == 1);
}

TEST_CASE("syntax errors and unknown keys are reported") {
    CHECK_THROWS_WITH_AS(parse_scenario("{ not json"), doctest::Contains("syntax error"),
                         ScenarioError);
    std::string bad = kMinimal;
    bad.insert(bad.size() - 2, R"(, "bogus_key": 1)");
    CHECK_THROWS_WITH_AS(parse_scenario(bad), doctest::Contains("unknown key"), ScenarioError);
    CHECK_THROWS_WITH_AS(parse_scenario(R"({"name": "x"})"),
                         doctest::Contains("missing required field"), ScenarioError);
}

TEST_CASE("inheritance overrides only the keys present in the child") {
    std::map<std::string, std::string> library;
    library["parent"] = two_node_scenario("parent", stream_json("s1", "a", "b"));
    ResourceResolver resolver = [&](const std::string& name) -> std::optional<std::string> {
        auto it = library.find(name);
        if (it == library.end()) return std::nullopt;
        return it->second;
    };

    std::string child = R"({"name": "child", "base": "parent", "seed": 99})";
    ScenarioConfig cfg = parse_scenario(child, resolver);
    ScenarioConfig parent = parse_scenario(library["parent"], resolver);
    CHECK(cfg.seed == 99);
    CHECK(cfg.name == "child");
    CHECK(cfg.duration_ns == parent.duration_ns);
    REQUIRE(cfg.streams.size() == 1);
    CHECK(cfg.streams[0].id == "s1");

    SUBCASE("lists replace, not merge") {
        std::string child2 = R"({"name": "child2", "base": "parent", "streams": []})";
        CHECK(parse_scenario(child2, resolver).streams.empty());
    }
    SUBCASE("unresolvable base") {
        CHECK_THROWS_WITH_AS(parse_scenario(R"({"name": "x", "base": "nope"})", resolver),
                             doctest::Contains("unresolvable"), ScenarioError);
    }
    SUBCASE("inheritance cycles are rejected") {
        library["loop_a"] = R"({"name": "loop_a", "base": "loop_b"})";
        library["loop_b"] = R"({"name": "loop_b", "base": "loop_a"})";
        CHECK_THROWS_WITH_AS(parse_scenario(library["loop_a"], resolver),
                             doctest::Contains("cycle"), ScenarioError);
    }
}

TEST_CASE("inheritance is idempotent") {
    std::map<std::string, std::string> library;
    library["parent"] = two_node_scenario("parent", stream_json("s1", "a", "b"));
    ResourceResolver resolver = [&](const std::string& name) -> std::optional<std::string> {
        auto it = library.find(name);
        return it == library.end() ? std::nullopt : std::optional(it->second);
    };
    std::string child = R"({"name": "child", "base": "parent", "seed": 3})";
    ScenarioConfig once = parse_scenario(child, resolver);
    // resolving the resolved form again changes nothing
    ScenarioConfig twice = parse_scenario(serialize_scenario(once), resolver);
    CHECK(once == twice);
}

TEST_CASE("parse-serialize round trip") {
    ScenarioConfig cfg = parse_scenario(two_node_scenario("rt", stream_json("s1", "a", "b")));
    ScenarioConfig again = parse_scenario(serialize_scenario(cfg));
    CHECK(cfg == again);
}

TEST_CASE("validation reports all violations with paths") {
    ScenarioConfig cfg = parse_scenario(two_node_scenario(
        "bad", stream_json("ghost", "a", "zCNowhere") + "," + stream_json("runt", "a", "b", 40)));
    ValidationReport rep = validate_scenario(cfg);
    CHECK(!rep.ok());
    REQUIRE(rep.errors.size() >= 2);
    bool found_missing_node = false, found_runt = false;
    for (const auto& e : rep.errors) {
        if (e.path.find("ghost") != std::string::npos &&
            e.message.find("zCNowhere") != std::string::npos)
            found_missing_node = true;
        if (e.path.find("runt") != std::string::npos &&
            e.message.find("64-byte") != std::string::npos)
            found_runt = true;
    }
    CHECK(found_missing_node);
    CHECK(found_runt);
}

TEST_CASE("valid scenario produces an empty error list") {
    ScenarioConfig cfg = parse_scenario(two_node_scenario("ok", stream_json("s1", "a", "b")));
    ValidationReport rep = validate_scenario(cfg);
    CHECK(rep.ok());
    CHECK(rep.resolved_stream_count == 1);
}

TEST_CASE("wildcard destinations expand over endpoints and exclude the source") {
    ScenarioConfig cfg = parse_scenario(R"({
      "name": "wild", "duration_ns": 1000000000, "seed": 1,
      "topology": {
        "nodes": [
          {"name": "zCFrontLeft", "kind": "endpoint"},
          {"name": "zCFrontRight", "kind": "endpoint"},
          {"name": "zCRearLeft", "kind": "endpoint"},
          {"name": "sw", "kind": "switch"}
        ],
        "links": [
          {"a": "zCFrontLeft.eth0", "b": "sw.p0", "rate_bps": 1000000000},
          {"a": "zCFrontRight.eth0", "b": "sw.p1", "rate_bps": 1000000000},
          {"a": "zCRearLeft.eth0", "b": "sw.p2", "rate_bps": 1000000000}
        ]
      },
      "streams": [{"id": "s", "pcp": 0, "source": "zCFrontLeft", "destinations": ["zC*"],
                   "frame_size": 64, "cycle": {"fixed_ns": 1000000},
                   "shaping_class": "strict_priority"}]
    })");
    REQUIRE(cfg.streams.size() == 1);
    auto& d = cfg.streams[0].resolved_destinations;
    REQUIRE(d.size() == 2);
    CHECK(std::find(d.begin(), d.end(), "zCFrontRight") != d.end());
    CHECK(std::find(d.begin(), d.end(), "zCRearLeft") != d.end());
}

TEST_CASE("shipped baseline resolves to the published stream plan") {
    ScenarioConfig cfg = load_scenario_file(std::string(NADSIM_CONFIG_DIR) + "/baseline.json");
    ValidationReport rep = validate_scenario(cfg);
    for (const auto& e : rep.errors) MESSAGE(e.path, ": ", e.message);
    CHECK(rep.ok());
    CHECK(cfg.streams.size() == 216);

    // per-row counts of the shipped traffic plan
    std::map<std::string, int> by_source;
    int can_count = 0;
    for (const auto& s : cfg.streams) {
        if (s.pcp == 4) {
            ++can_count;
            ++by_source[s.source];
        }
    }
    CHECK(can_count == 202);
    CHECK(by_source["zCFrontLeft"] == 42);
    CHECK(by_source["zCFrontRight"] == 61);
    CHECK(by_source["zCRearLeft"] == 7);
    CHECK(by_source["zCRearRight"] == 78);
    CHECK(by_source["infotainment"] == 14);

    int pcp6 = 0, pcp5 = 0, pcp7 = 0, pcp2 = 0;
    for (const auto& s : cfg.streams) {
        if (s.pcp == 6) ++pcp6;
        if (s.pcp == 5) ++pcp5;
        if (s.pcp == 7) ++pcp7;
        if (s.pcp == 2) ++pcp2;
    }
    CHECK(pcp6 == 6);
    CHECK(pcp5 == 6);
    CHECK(pcp7 == 1);
    CHECK(pcp2 == 1);
}

TEST_CASE("child scenario differs from baseline only in anomalies") {
    std::string dir = NADSIM_CONFIG_DIR;
    ScenarioConfig base = load_scenario_file(dir + "/baseline.json");
    ScenarioConfig child = load_scenario_file(dir + "/eliminate_auto_brake.json");
    CHECK(!base.anomalies.size());
    CHECK(child.anomalies.size() == 1);
    ScenarioConfig child_copy = child;
    child_copy.anomalies = base.anomalies;
    child_copy.name = base.name;
    child_copy.base.reset();
    CHECK(child_copy == base);
}
