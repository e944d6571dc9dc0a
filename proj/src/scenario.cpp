#include "lfcsim/scenario.hpp"

#include "lfcsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace lfcsim {

namespace {

// Runs `check` and rethrows engine-level argument errors as a ConfigError
// located at `where`.
template <typename Fn>
void located(const std::string& where, Fn&& check)
{
    try {
        check();
    } catch (const InvalidArgument& e) {
        throw ConfigError(where, e.what());
    }
}

void require(bool ok, const std::string& where, const std::string& message)
{
    if (!ok)
        throw ConfigError(where, message);
}

bool contains(const std::vector<std::string>& ids, const std::string& id)
{
    return std::find(ids.begin(), ids.end(), id) != ids.end();
}

} // namespace

void LinkParams::validate(const std::string& where) const
{
    require(std::isfinite(delay_s) && delay_s >= 0.0, where, "delay must be >= 0");
    require(std::isfinite(jitter_s) && jitter_s >= 0.0, where, "jitter must be >= 0");
    require(jitter_s <= delay_s, where, "jitter half-width must not exceed the base delay");
    require(std::isfinite(drop_probability) && drop_probability >= 0.0 && drop_probability <= 1.0, where,
        "drop probability must lie in [0, 1]");
}

std::size_t exact_ratio(double span, double step)
{
    if (!(step > 0.0) || !(span > 0.0) || !std::isfinite(span / step))
        return 0;
    const double r = span / step;
    const double n = std::round(r);
    if (n < 1.0 || std::abs(r - n) > 1e-9 * std::max(1.0, r))
        return 0;
    return static_cast<std::size_t>(n);
}

std::size_t Scenario::substeps() const { return exact_ratio(dt_cosim_s, dt_s); }

std::size_t Scenario::grants_per_interval() const { return exact_ratio(agc.interval_s, dt_cosim_s); }

std::size_t Scenario::grant_count() const { return exact_ratio(horizon_s, dt_cosim_s); }

void Scenario::validate() const
{
    located("[system]", [&] { plant.swing.validate(); });

    std::set<std::string> ids;
    for (const auto& g : plant.governors) {
        const std::string where = "[[governor]] id=" + g.id;
        require(!g.id.empty(), "[[governor]]", "missing id");
        require(ids.insert(g.id).second, where, "duplicate id");
        located(where, [&] { g.validate(); });
    }
    for (const auto& a : aggregators) {
        require(!a.empty(), "[[aggregator]]", "missing id");
        require(ids.insert(a).second, "[[aggregator]] id=" + a, "duplicate id");
    }
    require(ids.count("uplink") == 0, "[[governor]]/[[aggregator]]", "'uplink' is a reserved id");

    std::set<std::string> der_ids;
    std::set<std::string> served;
    for (const auto& d : plant.ders) {
        const std::string where = "[[der]] id=" + d.id;
        require(!d.id.empty(), "[[der]]", "missing id");
        require(der_ids.insert(d.id).second, where, "duplicate id");
        require(contains(aggregators, d.aggregator_id), where + " aggregator",
            "unknown aggregator '" + d.aggregator_id + "'");
        served.insert(d.aggregator_id);
        located(where, [&] { d.validate(); });
    }
    for (const auto& a : aggregators)
        require(served.count(a) == 1, "[[aggregator]] id=" + a, "aggregator has no DER units");
    require(!plant.governors.empty() || !plant.ders.empty(), "[[governor]]/[[der]]", "scenario has no units");

    require(agc.betas.size() == participant_count(), "[agc] participation",
        "expected one participation factor per governor and aggregator");
    if (agc.enabled) {
        located("[agc]", [&] { agc.validate(); });
    } else {
        require(std::isfinite(agc.interval_s) && agc.interval_s > 0.0, "[agc] interval", "interval must be > 0");
        require(std::isfinite(agc.f_db_hz) && agc.f_db_hz >= 0.0, "[agc] f_db", "f_db must be >= 0");
    }
    require(agc.f0_hz == plant.swing.f0_hz, "[agc] f0", "AGC reference must equal the system f0");

    network.uplink.validate("[network] uplink");
    network.governor.validate("[network] governor");
    network.der.validate("[network] der");
    for (const auto& o : network.overrides) {
        const std::string where = "[[channel]] target=" + o.target;
        require(o.target == "uplink" || ids.count(o.target) == 1, where, "unknown channel target");
        o.link.validate(where);
    }

    for (const auto& e : events)
        located("[[event]]", [&] { e.validate(); });

    require(std::isfinite(dt_s) && dt_s > 0.0 && dt_s <= kMaxStep + 1e-12, "[simulation] dt", "dt must lie in (0, 0.1]");
    require(std::isfinite(dt_cosim_s) && dt_cosim_s > 0.0, "[simulation] dt_cosim", "dt_cosim must be > 0");
    require(substeps() > 0, "[simulation] dt", "dt must divide dt_cosim");
    require(grants_per_interval() > 0, "[simulation] dt_cosim", "dt_cosim must divide the AGC interval");
    require(grant_count() > 0, "[simulation] horizon", "horizon must be a positive multiple of dt_cosim");

    located("[detector]", [&] { detector.validate(); });
    require(detector.f0_hz == plant.swing.f0_hz, "[detector]", "detector reference must equal the system f0");
    require(horizon_s >= 2.0 * detector.window_s, "[simulation] horizon", "horizon must cover two detector windows");

    for (double v : sweep.kp)
        require(std::isfinite(v), "[sweep] kp", "grid values must be finite");
    for (double v : sweep.ki)
        require(std::isfinite(v), "[sweep] ki", "grid values must be finite");
    for (double v : sweep.delay)
        require(std::isfinite(v) && v >= 0.0, "[sweep] delay", "delays must be finite and >= 0");
    require(std::is_sorted(sweep.delay.begin(), sweep.delay.end()), "[sweep] delay", "delay grid must be sorted");
}

const char* to_string(AceSource s)
{
    return s == AceSource::transmission ? "transmission" : "control_center";
}

const char* to_string(DelayTarget d)
{
    switch (d) {
    case DelayTarget::der:
        return "der";
    case DelayTarget::governor:
        return "governor";
    case DelayTarget::both:
        return "both";
    }
    return "?";
}

Scenario with_gains(const Scenario& s, double kp, double ki)
{
    Scenario out = s;
    out.agc.kp = kp;
    out.agc.ki = ki;
    return out;
}

Scenario with_delay(const Scenario& s, double delay, DelayTarget target)
{
    const bool gov = target == DelayTarget::governor || target == DelayTarget::both;
    const bool der = target == DelayTarget::der || target == DelayTarget::both;

    Scenario out = s;
    if (gov)
        out.network.governor.delay_s = delay;
    if (der)
        out.network.der.delay_s = delay;

    auto is_governor = [&](const std::string& id) {
        return std::any_of(s.plant.governors.begin(), s.plant.governors.end(),
            [&](const GovernorUnit& g) { return g.id == id; });
    };
    for (auto& o : out.network.overrides) {
        if (o.target == "uplink")
            continue;
        if ((gov && is_governor(o.target)) || (der && contains(s.aggregators, o.target)))
            o.link.delay_s = delay;
    }
    return out;
}

} // namespace lfcsim
