#include "lfcsim/config.hpp"
#include "lfcsim/cosim.hpp"
#include "lfcsim/errors.hpp"
#include "lfcsim/rng.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace lfcsim;
using lfcsim::testing::read_scenario_text;
using lfcsim::testing::run_monolithic;
using lfcsim::testing::set_key;

namespace {

const FederateId kCc{FederateKind::control_center, 0};
const FederateId kAgg0{FederateKind::der_aggregator, 0};
const FederateId kAgg1{FederateKind::der_aggregator, 1};

LinkParams link(double delay, double jitter = 0.0, double drop = 0.0)
{
    return {delay, jitter, drop};
}

// Advances `b` one grant at a time until `t`, collecting everything delivered.
std::vector<Delivery> run_to(Broker& b, double t)
{
    std::vector<Delivery> out;
    while (b.granted() < t - 1e-9) {
        auto adv = b.advance(b.granted() + b.dt_cosim());
        for (auto& m : adv.delivered)
            out.push_back({m, adv.granted});
    }
    return out;
}

} // namespace

TEST_CASE("channel send examples")
{
    DelayChannel fixed(0, kCc, kAgg0, link(3.0), 1);
    const auto r = fixed.send(Topic::agc_command, 0.5, 10.0);
    CHECK_FALSE(r.dropped);
    CHECK(r.message.deliver_time == 13.0);

    Broker b(0.1);
    const auto ch = b.add_channel(kCc, kAgg0, link(0.0, 0.0, 1.0), 5);
    for (int i = 0; i < 20; ++i)
        CHECK_FALSE(b.send(ch, Topic::agc_command, i));
    CHECK(b.in_flight() == 0);
    CHECK(b.drops().size() == 20);
}

TEST_CASE("jittered deliveries replay the seeded stream")
{
    const std::uint64_t seed = derive_seed(42, {3});
    DelayChannel ch(0, kCc, kAgg0, link(2.0, 0.5), seed);
    UniformStream oracle(seed);
    for (int i = 0; i < 200; ++i) {
        const double t = 0.1 * i;
        const auto r = ch.send(Topic::agc_command, 0.0, t);
        (void)oracle.next();  // drop draw
        const double expected = t + 2.0 + 0.5 * (2.0 * oracle.next() - 1.0);
        CHECK(r.message.deliver_time == expected);
        CHECK(r.message.deliver_time >= t + 1.5);
        CHECK(r.message.deliver_time <= t + 2.5);
    }
}

TEST_CASE("messages land on the first grant at or after their deliver time")
{
    Broker b(0.1);
    const auto ch = b.add_channel(kCc, kAgg0, link(3.0), 1);
    run_to(b, 9.97);
    CHECK(b.granted() == doctest::Approx(10.0));
    b.send(ch, Topic::agc_command, 1.0);  // deliver 13.0

    Broker b2(0.1);
    const auto ch2 = b2.add_channel(kCc, kAgg0, link(2.97), 1);
    run_to(b2, 10.0);
    b2.send(ch2, Topic::agc_command, 1.0);  // deliver 12.97

    const auto d1 = run_to(b, 13.5);
    const auto d2 = run_to(b2, 13.5);
    REQUIRE(d1.size() == 1);
    REQUIRE(d2.size() == 1);
    CHECK(d1[0].grant == doctest::Approx(13.0).epsilon(1e-12));
    CHECK(d2[0].grant == doctest::Approx(13.0).epsilon(1e-12));
}

TEST_CASE("simultaneous deliveries are ordered by channel")
{
    Broker b(0.1);
    const auto a = b.add_channel(kCc, kAgg0, link(1.0), 1);
    const auto c = b.add_channel(kCc, kAgg1, link(1.0), 2);
    b.send(c, Topic::agc_command, 2.0);
    b.send(a, Topic::agc_command, 1.0);
    const auto d = run_to(b, 1.0);
    REQUIRE(d.size() == 2);
    CHECK(d[0].message.channel == a);
    CHECK(d[1].message.channel == c);
}

TEST_CASE("lockstep violations are scheduling errors")
{
    Broker b(0.1);
    CHECK_THROWS_AS(b.advance(0.2), SchedulingError);
    const auto ch = b.add_channel(kCc, kAgg0, link(0.0), 1);
    b.send(ch, Topic::agc_command, 1.0);
    CHECK_THROWS_AS(b.advance(0.1), SchedulingError);
    CHECK(b.release(kAgg0).size() == 1);
    CHECK_NOTHROW(b.advance(0.1));
}

TEST_CASE("federation properties on the reference DER scenario")
{
    auto s = parse_scenario(read_scenario_text("reference_der.cfg"));
    s.network.der = link(1.3, 0.6, 0.1);
    s.network.uplink = link(0.2, 0.1, 0.05);
    const auto r = run_federation(s);
    REQUIRE_FALSE(r.diverged());

    SUBCASE("exactly-once and no time travel")
    {
        CHECK(r.sent == r.deliveries.size() + r.drops.size());
        for (const auto& d : r.deliveries) {
            CHECK(d.message.send_time >= 0.0);
            CHECK(d.message.deliver_time >= d.message.send_time);
            CHECK(d.grant >= d.message.deliver_time - 1e-9);
            CHECK(d.grant < d.message.deliver_time + s.dt_cosim_s - 1e-9);
        }
    }
    SUBCASE("determinism")
    {
        const auto again = run_federation(s);
        CHECK(again.samples == r.samples);
        CHECK(again.deliveries == r.deliveries);
        CHECK(again.drops == r.drops);
    }
}

TEST_CASE("per-channel FIFO at zero jitter")
{
    auto s = parse_scenario(read_scenario_text("reference_der.cfg"));
    s.network.der = link(2.35);
    const auto r = run_federation(s);
    std::vector<std::int64_t> last(16, -1);
    for (const auto& d : r.deliveries) {
        auto& prev = last.at(d.message.channel);
        CHECK(static_cast<std::int64_t>(d.message.seq) > prev);
        prev = static_cast<std::int64_t>(d.message.seq);
    }
}

TEST_CASE("equilibrium federation stays at nominal")
{
    auto text = read_scenario_text("reference_der.cfg");
    text = set_key(text, "magnitude", "0");
    const auto r = run_federation(parse_scenario(text));
    for (const auto& row : r.samples) {
        CHECK(std::abs(row.f_hz - 60.0) < 1e-9);
        CHECK(row.agc_cmd_sent == 0.0);
        CHECK(row.agc_cmd_applied_der == 0.0);
    }
}

TEST_CASE("zero-delay federation matches direct coupling")
{
    const auto s = parse_scenario(read_scenario_text("reference_der.cfg"));
    const auto fed = run_federation(s);
    const auto mono = run_monolithic(s);
    REQUIRE(fed.samples.size() == mono.samples.size());
    for (std::size_t i = 0; i < fed.samples.size(); ++i) {
        const auto& a = fed.samples[i];
        const auto& b = mono.samples[i];
        CHECK(std::abs(a.f_hz - b.f_hz) <= 1e-9);
        CHECK(std::abs(a.agc_cmd_applied_der - b.agc_cmd_applied_der) <= 1e-9);
        CHECK(std::abs(a.p_der_total - b.p_der_total) <= 1e-9);
    }
}

TEST_CASE("a 3 s downlink delay shifts the applied command by 3 s")
{
    auto s = parse_scenario(read_scenario_text("reference_der.cfg"));
    s.network.der = link(3.0);
    const auto r = run_federation(s);
    const std::size_t lag = 30;
    REQUIRE(r.samples.size() > lag);
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
        const double expected = i < lag ? 0.0 : r.samples[i - lag].agc_cmd_sent;
        CHECK(r.samples[i].agc_cmd_applied_der == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("dropped commands leave the last one held")
{
    auto s = parse_scenario(read_scenario_text("reference_der.cfg"));
    s.network.der = link(0.0, 0.0, 1.0);
    const auto r = run_federation(s);
    CHECK(r.drops.size() == r.sent - r.deliveries.size());
    for (const auto& row : r.samples)
        CHECK(row.agc_cmd_applied_der == 0.0);
}
