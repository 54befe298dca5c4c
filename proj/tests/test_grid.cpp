#include "doctest.h"
#include "tplan/errors.hpp"
#include "tplan/grid.hpp"

#include <string>

using namespace tplan;

namespace {
const std::string kData = TPLAN_DATA_DIR;

std::string tiny_network(const std::string& patch_in = "") {
    std::string base = R"({
  "format": "tplan-network", "version": 1, "power_base_mva": 1000.0,
  "buses": [
    {"id": "a", "lat": 50.0, "lon": -113.0, "avg_load": 1.0},
    {"id": "b", "lat": 52.0, "lon": -113.0, "avg_load": 0.5}
  ],
  "rows": [
    {"id": "r1", "from": "a", "to": "b", "length_km": 120.0, "reactance": 0.1,
     "existing_line": true, "static_rating_existing": 1.0}
  ],
  "generators": [
    {"id": "g1", "bus": "a", "p_max": 2.0, "cost_pre": 0.04}
  ],
  "zones": [
    {"id": "z1", "kind": "wind", "lat": 50.1, "lon": -113.1, "area": 10.0, "footprint": 25.0}
  ]
})";
    return patch_in.empty() ? base : patch_in;
}
} // namespace

TEST_CASE("shipped six bus example loads with ten rows and six existing") {
    Network net = load_network(kData + "/aeso6/network.json");
    CHECK(net.buses.size() == 6);
    CHECK(net.rows.size() == 10);
    int existing = 0;
    for (const auto& r : net.rows)
        if (r.existing_line) existing++;
    CHECK(existing == 6);
    auto rep = validate_network(net);
    CHECK(rep.violations.empty());
}

TEST_CASE("empty bus list is rejected") {
    std::string text = R"({"format":"tplan-network","version":1,"power_base_mva":100.0,
        "buses":[],"rows":[],"generators":[],"zones":[]})";
    CHECK_THROWS_WITH_AS(parse_network(text), doctest::Contains("no buses"), ValidationError);
}

TEST_CASE("dangling bus reference names the offending id") {
    std::string text = R"({"format":"tplan-network","version":1,"power_base_mva":100.0,
        "buses":[{"id":"a","lat":0,"lon":0}],
        "rows":[{"id":"r1","from":"a","to":"X","length_km":1.0,"reactance":0.1}],
        "generators":[],"zones":[]})";
    CHECK_THROWS_WITH_AS(parse_network(text), doctest::Contains("'X'"), ValidationError);
}

TEST_CASE("unknown keys are rejected") {
    std::string text = R"({"format":"tplan-network","version":1,"power_base_mva":100.0,
        "buses":[{"id":"a","lat":0,"lon":0,"voltage":230}],
        "rows":[],"generators":[],"zones":[]})";
    CHECK_THROWS_WITH_AS(parse_network(text), doctest::Contains("voltage"), ParseError);
}

TEST_CASE("validator flags zero reactance") {
    Network net = parse_network(tiny_network());
    net.rows[0].reactance = 0.0;
    auto rep = validate_network(net);
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].find("reactance") != std::string::npos);
}

TEST_CASE("validator flags inverted generator bounds") {
    Network net = parse_network(tiny_network());
    net.generators[0].p_min = 3.0; // above p_max
    auto rep = validate_network(net);
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].find("p_min") != std::string::npos);
}

TEST_CASE("validator flags wrong ramp signs") {
    Network net = parse_network(tiny_network());
    net.generators[0].ramp_down = 0.2; // must be <= 0
    auto rep = validate_network(net);
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].find("ramp") != std::string::npos);
}

TEST_CASE("round trip reproduces the network byte for byte") {
    Network net = load_network(kData + "/aeso6/network.json");
    std::string once = network_to_json(net);
    Network back = parse_network(once);
    CHECK(network_to_json(back) == once);
    CHECK(back.zones.size() == net.zones.size());
    for (size_t i = 0; i < net.zones.size(); ++i) CHECK(back.zones[i].bus == net.zones[i].bus);
}

TEST_CASE("zone association is the geodesically nearest bus") {
    Network net = load_network(kData + "/aeso6/network.json");
    for (const auto& z : net.zones) {
        double dz = haversine_km(z.lat, z.lon, net.bus(z.bus).lat, net.bus(z.bus).lon);
        for (const auto& b : net.buses) {
            double d = haversine_km(z.lat, z.lon, b.lat, b.lon);
            CHECK(dz <= d + 1e-9);
        }
    }
}

TEST_CASE("nearest bus ties break toward the lower id") {
    Network net;
    net.power_base_mva = 100;
    net.buses.push_back({"q", "q", 50.0, -110.0});
    net.buses.push_back({"p", "p", 50.0, -110.0}); // same point, lower id
    CHECK(net.buses[nearest_bus(net, 50.0, -110.0)].id == "p");
}

TEST_CASE("declared zone bus must match the nearest bus") {
    std::string text = R"({"format":"tplan-network","version":1,"power_base_mva":100.0,
        "buses":[{"id":"a","lat":50,"lon":-113},{"id":"b","lat":55,"lon":-113}],
        "rows":[],"generators":[],
        "zones":[{"id":"z","kind":"solar","lat":50.1,"lon":-113.0,"area":5.0,
                  "footprint":10.0,"bus":"b"}]})";
    CHECK_THROWS_AS(parse_network(text), ValidationError);
}

TEST_CASE("connectivity gap over existing lines is a warning not an error") {
    Network net = parse_network(tiny_network());
    net.rows[0].existing_line = false;
    net.rows[0].static_rating_existing = 0;
    auto rep = validate_network(net);
    CHECK(rep.violations.empty());
    REQUIRE(rep.warnings.size() == 1);
    CHECK(rep.warnings[0].find("unreachable") != std::string::npos);
}

TEST_CASE("catalog loads and validates") {
    TechnologyCatalog cat = load_catalog(kData + "/aeso6/catalog.json");
    CHECK(cat.techs.size() == 11);
    CHECK(validate_catalog(cat).violations.empty());
    CHECK(cat.at("B").eta_ch == doctest::Approx(0.92));
    CHECK(cat.at("F").max_units == 10);

    TechnologyCatalog broken = cat;
    broken.techs["B"].soc_min = broken.techs["B"].soc_max;
    CHECK(!validate_catalog(broken).violations.empty());
}

TEST_CASE("horizon loads and validates") {
    PlanningHorizon hz = load_horizon(kData + "/aeso6/horizon.json");
    CHECK(hz.n_stages == 3);
    CHECK(hz.co2_targets.size() == 3);
    CHECK(validate_horizon(hz).violations.empty());

    PlanningHorizon broken = hz;
    broken.co2_targets.pop_back();
    CHECK(!validate_horizon(broken).violations.empty());
    broken = hz;
    broken.n_stages = 1;
    CHECK(!validate_horizon(broken).violations.empty());
}

TEST_CASE("haversine agrees with a known city pair") {
    // Calgary to Edmonton is roughly 280 km great-circle
    double d = haversine_km(51.0447, -114.0719, 53.5461, -113.4938);
    CHECK(d == doctest::Approx(280).epsilon(0.02));
}
