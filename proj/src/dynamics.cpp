#include "lfcsim/dynamics.hpp"

#include "lfcsim/errors.hpp"
#include "lfcsim/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lfcsim {

namespace {

void require(bool ok, const std::string& what)
{
    if (!ok)
        throw InvalidArgument(what);
}

// Rate of a state that is confined to [lo, hi]: zero when it pushes
// against an active limit.
double limited_rate(double value, double rate, double lo, double hi)
{
    if ((value >= hi && rate > 0.0) || (value <= lo && rate < 0.0))
        return 0.0;
    return rate;
}

} // namespace

void SwingParams::validate() const
{
    require(std::isfinite(inertia_s) && inertia_s > 0.0, "swing: H must be > 0");
    require(std::isfinite(damping) && damping >= 0.0, "swing: D must be >= 0");
    require(std::isfinite(s_base_mw) && s_base_mw > 0.0, "swing: S_base must be > 0");
    require(std::isfinite(f0_hz) && f0_hz > 0.0, "swing: f0 must be > 0");
}

void GovernorUnit::validate() const
{
    const std::string who = "governor '" + id + "': ";
    require(std::isfinite(droop) && droop > 0.0, who + "R must be > 0");
    require(std::isfinite(tg) && tg > 0.0, who + "Tg must be > 0");
    require(std::isfinite(tch) && tch > 0.0, who + "Tch must be > 0");
    require(std::isfinite(p_min) && std::isfinite(p_max) && p_min <= p_max, who + "P_min must be <= P_max");
    require(std::isfinite(p_ref) && p_min <= p_ref && p_ref <= p_max, who + "P_ref must lie in [P_min, P_max]");
}

void DerUnit::validate() const
{
    const std::string who = "der '" + id + "': ";
    require(std::isfinite(t_der) && t_der > 0.0, who + "T_der must be > 0");
    require(std::isfinite(d_dn) && d_dn >= 0.0, who + "D_dn must be >= 0");
    require(std::isfinite(d_up) && d_up >= 0.0, who + "D_up must be >= 0");
    require(std::isfinite(db_uf_hz) && db_uf_hz >= 0.0, who + "db_UF must be >= 0");
    require(std::isfinite(db_of_hz) && db_of_hz >= 0.0, who + "db_OF must be >= 0");
    require(std::isfinite(p_mppt) && p_mppt >= 0.0, who + "P_mppt must be >= 0");
    require(std::isfinite(p0) && 0.0 <= p0 && p0 <= p_mppt, who + "P0 must lie in [0, P_mppt]");
}

void Plant::validate() const
{
    swing.validate();
    for (const auto& g : governors)
        g.validate();
    for (const auto& d : ders)
        d.validate();
}

double Plant::balanced_load() const
{
    double total = 0.0;
    for (const auto& g : governors)
        total += g.p_ref;
    for (const auto& d : ders)
        total += d.p0;
    return total;
}

double SystemState::p_mech_total() const
{
    return std::accumulate(governors.begin(), governors.end(), 0.0,
        [](double acc, const GovernorState& g) { return acc + g.p_mech; });
}

double SystemState::p_der_total() const
{
    return std::accumulate(der_out.begin(), der_out.end(), 0.0);
}

bool SystemState::all_finite() const
{
    auto finite = [](double v) { return std::isfinite(v); };
    return std::isfinite(t) && std::isfinite(df_pu) && std::isfinite(p_load)
        && std::all_of(der_out.begin(), der_out.end(), finite)
        && std::all_of(governors.begin(), governors.end(),
            [](const GovernorState& g) { return std::isfinite(g.p_valve) && std::isfinite(g.p_mech); });
}

ControlInputs ControlInputs::zeros(const Plant& plant)
{
    return {std::vector<double>(plant.governors.size(), 0.0), std::vector<double>(plant.ders.size(), 0.0)};
}

void Event::validate() const
{
    require(std::isfinite(time) && time >= 0.0, "event: time must be >= 0");
    require(std::isfinite(magnitude), "event: magnitude must be finite");
}

const char* to_string(EventKind kind)
{
    switch (kind) {
    case EventKind::generation_outage:
        return "generation_outage";
    case EventKind::load_step:
        return "load_step";
    }
    return "?";
}

SystemState initial_state(const Plant& plant)
{
    SystemState s;
    s.governors.reserve(plant.governors.size());
    for (const auto& g : plant.governors)
        s.governors.push_back({g.p_ref, g.p_ref});
    s.der_out.reserve(plant.ders.size());
    for (const auto& d : plant.ders)
        s.der_out.push_back(d.p0);
    s.p_load = plant.balanced_load();
    return s;
}

double pfr_droop(double f_hz, const DerUnit& unit, double nominal_hz)
{
    if (!std::isfinite(f_hz))
        throw InvalidArgument("pfr_droop: frequency is not finite");
    const double lower = nominal_hz - unit.db_uf_hz;
    const double upper = nominal_hz + unit.db_of_hz;
    if (f_hz < lower)
        return (lower - f_hz) / nominal_hz * unit.d_dn;
    if (f_hz > upper)
        return -(f_hz - upper) / nominal_hz * unit.d_up;
    return 0.0;
}

double der_target(const DerUnit& unit, double f_hz, double p_ext, double nominal_hz)
{
    return std::clamp(unit.p0 + pfr_droop(f_hz, unit, nominal_hz) + p_ext, 0.0, unit.p_mppt);
}

StateRate derivatives(const SystemState& state, const Plant& plant, const ControlInputs& inputs)
{
    if (!state.all_finite())
        throw InvalidArgument("derivatives: non-finite state at t=" + std::to_string(state.t));
    if (state.governors.size() != plant.governors.size() || state.der_out.size() != plant.ders.size()
        || inputs.governor_ext.size() != plant.governors.size() || inputs.der_ext.size() != plant.ders.size())
        throw InvalidArgument("derivatives: state/input shape does not match plant");

    const auto& swing = plant.swing;
    const double f_hz = state.f_hz(swing);

    StateRate rate;
    rate.governors.resize(plant.governors.size());
    rate.der_out.resize(plant.ders.size());

    for (std::size_t i = 0; i < plant.governors.size(); ++i) {
        const auto& unit = plant.governors[i];
        const auto& g = state.governors[i];
        const double valve_target = unit.p_ref + inputs.governor_ext[i] - state.df_pu / unit.droop;
        rate.governors[i].p_valve = limited_rate(g.p_valve, (valve_target - g.p_valve) / unit.tg, unit.p_min, unit.p_max);
        rate.governors[i].p_mech = (g.p_valve - g.p_mech) / unit.tch;
    }

    for (std::size_t j = 0; j < plant.ders.size(); ++j) {
        const auto& unit = plant.ders[j];
        const double out = state.der_out[j];
        const double target = der_target(unit, f_hz, inputs.der_ext[j], swing.f0_hz);
        rate.der_out[j] = limited_rate(out, (target - out) / unit.t_der, 0.0, unit.p_mppt);
    }

    const double imbalance = state.p_mech_total() + state.p_der_total() - state.p_load - swing.damping * state.df_pu;
    rate.df_pu = imbalance / (2.0 * swing.inertia_s);
    return rate;
}

SystemState add_scaled(const SystemState& x, double h, const StateRate& k)
{
    SystemState out = x;
    out.t += h;
    out.df_pu += h * k.df_pu;
    for (std::size_t i = 0; i < out.governors.size(); ++i) {
        out.governors[i].p_valve += h * k.governors[i].p_valve;
        out.governors[i].p_mech += h * k.governors[i].p_mech;
    }
    for (std::size_t j = 0; j < out.der_out.size(); ++j)
        out.der_out[j] += h * k.der_out[j];
    return out;
}

SystemState rk4_step(const SystemState& state, const Plant& plant, const ControlInputs& inputs, double dt)
{
    if (!(dt > 0.0) || dt > kMaxStep + 1e-12)
        throw InvalidArgument("rk4_step: dt must lie in (0, " + std::to_string(kMaxStep) + "]");

    auto rate = [&](const SystemState& s) { return derivatives(s, plant, inputs); };
    auto combine = [](const SystemState& s, double h, const StateRate& k1, const StateRate& k2,
                       const StateRate& k3, const StateRate& k4) {
        auto blend = [h](double x, double a, double b, double c, double d) {
            return x + h / 6.0 * (a + 2.0 * b + 2.0 * c + d);
        };
        SystemState out = s;
        out.t = s.t + h;
        out.df_pu = blend(s.df_pu, k1.df_pu, k2.df_pu, k3.df_pu, k4.df_pu);
        for (std::size_t i = 0; i < out.governors.size(); ++i) {
            out.governors[i].p_valve = blend(s.governors[i].p_valve, k1.governors[i].p_valve,
                k2.governors[i].p_valve, k3.governors[i].p_valve, k4.governors[i].p_valve);
            out.governors[i].p_mech = blend(s.governors[i].p_mech, k1.governors[i].p_mech,
                k2.governors[i].p_mech, k3.governors[i].p_mech, k4.governors[i].p_mech);
        }
        for (std::size_t j = 0; j < out.der_out.size(); ++j)
            out.der_out[j] = blend(s.der_out[j], k1.der_out[j], k2.der_out[j], k3.der_out[j], k4.der_out[j]);
        return out;
    };

    SystemState next;
    try {
        next = rk4_advance(state, dt, rate, combine);
    } catch (const InvalidArgument& e) {
        // A stage evaluation met a non-finite intermediate state.
        throw IntegrationDiverged(state.t + dt, e.what());
    }

    for (std::size_t i = 0; i < next.governors.size(); ++i) {
        const auto& unit = plant.governors[i];
        next.governors[i].p_valve = std::clamp(next.governors[i].p_valve, unit.p_min, unit.p_max);
    }
    for (std::size_t j = 0; j < next.der_out.size(); ++j)
        next.der_out[j] = std::clamp(next.der_out[j], 0.0, plant.ders[j].p_mppt);

    if (!next.all_finite())
        throw IntegrationDiverged(next.t, "integration diverged");
    return next;
}

SystemState apply_event(const SystemState& state, const Event& event)
{
    event.validate();
    SystemState out = state;
    // Both kinds enter as a signed change of net load; an outage removes
    // generation, which is the same deficit.
    out.p_load += event.magnitude;
    return out;
}

EventSchedule::EventSchedule(std::vector<Event> events)
    : events_(std::move(events))
    , applied_(events_.size(), false)
{
    for (const auto& e : events_)
        e.validate();
    std::stable_sort(events_.begin(), events_.end(), [](const Event& a, const Event& b) { return a.time < b.time; });
}

std::size_t EventSchedule::apply_due(SystemState& state)
{
    constexpr double kTimeEps = 1e-9;
    std::size_t count = 0;
    for (std::size_t i = 0; i < events_.size(); ++i) {
        if (!applied_[i] && events_[i].time <= state.t + kTimeEps) {
            apply(i, state);
            ++count;
        }
    }
    return count;
}

void EventSchedule::apply(std::size_t index, SystemState& state)
{
    if (applied_.at(index))
        throw InvalidArgument("event " + std::to_string(index) + " already applied");
    state = apply_event(state, events_[index]);
    applied_[index] = true;
}

} // namespace lfcsim
