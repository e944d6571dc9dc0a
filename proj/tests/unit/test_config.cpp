#include "lfcsim/config.hpp"
#include "lfcsim/errors.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <string>

using namespace lfcsim;
using lfcsim::testing::read_scenario_text;
using lfcsim::testing::set_key;

namespace {

std::string location_of(const std::string& text)
{
    try {
        (void)parse_scenario(text);
    } catch (const ConfigError& e) {
        return e.location();
    }
    return "<accepted>";
}

} // namespace

TEST_CASE("shipped scenarios parse and round-trip")
{
    for (const char* name : {"reference_der.cfg", "reference_governor.cfg", "scale_760.cfg"}) {
        CAPTURE(name);
        const auto s = parse_scenario(read_scenario_text(name));
        const auto text = serialize_scenario(s);
        CHECK(parse_scenario(text) == s);
        CHECK(serialize_scenario(parse_scenario(text)) == text);
    }
}

TEST_CASE("reference scenario contents")
{
    const auto s = parse_scenario(read_scenario_text("reference_der.cfg"));
    CHECK(s.plant.governors.size() == 3);
    CHECK(s.aggregators.size() == 4);
    CHECK(s.plant.ders.size() == 20);
    CHECK(s.plant.ders[0].id == "A1.pv.1");
    CHECK(s.plant.ders[0].d_up == s.plant.ders[0].d_dn);
    CHECK(s.agc.betas == std::vector<double>{0, 0, 0, 0.25, 0.25, 0.25, 0.25});
    CHECK(s.sweep.kp == std::vector<double>{0.1, 0.2, 0.3, 0.4});
    CHECK(s.sweep.delay.size() == 41);
    CHECK(s.sweep.delay_target == DelayTarget::der);

    // DER fleet supplies 20% of the load.
    double der = 0.0;
    for (const auto& d : s.plant.ders)
        der += d.p0;
    CHECK(der / s.plant.balanced_load() == doctest::Approx(0.2));

    const auto scale = parse_scenario(read_scenario_text("scale_760.cfg"));
    CHECK(scale.aggregators.size() == 19);
    CHECK(scale.plant.ders.size() == 760);
}

TEST_CASE("participation factors that do not sum to one name the agc section")
{
    auto text = read_scenario_text("reference_der.cfg");
    text = set_key(text, "participation", "A1:0.3, A2:0.2, A3:0.2, A4:0.2");
    CHECK(location_of(text).find("[agc]") != std::string::npos);
}

TEST_CASE("dt must divide dt_cosim")
{
    auto text = set_key(read_scenario_text("reference_der.cfg"), "dt", "0.03");
    const auto loc = location_of(text);
    CHECK(loc.find("[simulation]") != std::string::npos);
    CHECK(loc.find("dt") != std::string::npos);
}

TEST_CASE("other invariant violations")
{
    const auto base = read_scenario_text("reference_der.cfg");
    CHECK(location_of(set_key(base, "horizon", "30")).find("[simulation] horizon") != std::string::npos);
    CHECK(location_of(set_key(base, "interval", "4.05")).find("[simulation] dt_cosim") != std::string::npos);
    CHECK(location_of(set_key(base, "aggregator", "A9")).find("[[der]]") != std::string::npos);
    CHECK(location_of(set_key(base, "der_delay", "-1")).find("[network]") != std::string::npos);
    CHECK(location_of(set_key(base, "delay", "3:-1:0")) != "<accepted>");
}

TEST_CASE("syntax errors carry the line")
{
    CHECK(location_of("[system]\nh = 5\nbogus = 1\n").find("line 3") != std::string::npos);
    CHECK(location_of("[system]\nh = 5\nh = 6\n").find("line 3") != std::string::npos);
    CHECK(location_of("[nowhere]\n").find("line 1") != std::string::npos);
    CHECK(location_of("[system]\nh 5\n").find("line 2") != std::string::npos);
    CHECK(location_of("[system]\nh = five\n").find("line 2") != std::string::npos);
}

TEST_CASE("missing file is a config error")
{
    CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.cfg"), ConfigError);
}

TEST_CASE("grid syntax")
{
    CHECK(parse_grid("0.1,0.2,0.3") == std::vector<double>{0.1, 0.2, 0.3});
    CHECK(parse_grid("0:0.25:1") == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    CHECK(parse_grid("0.1:0.1:0.4") == std::vector<double>{0.1, 0.2, 0.3, 0.4});
    CHECK(parse_grid("2") == std::vector<double>{2.0});
    CHECK_THROWS_AS(parse_grid(""), InvalidArgument);
    CHECK_THROWS_AS(parse_grid("1:0:2"), InvalidArgument);
    CHECK_THROWS_AS(parse_grid("a,b"), InvalidArgument);
}

TEST_CASE("format_double reads back exactly")
{
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 60.000000000000007})
        CHECK(std::stod(format_double(v)) == v);
}
