#include "lfcsim/cosim.hpp"

#include "lfcsim/errors.hpp"

#include <cmath>
#include <map>

namespace lfcsim {

std::string to_string(FederateId id)
{
    switch (id.kind) {
    case FederateKind::transmission:
        return "transmission";
    case FederateKind::control_center:
        return "control_center";
    case FederateKind::governor_agent:
        return "governor_agent#" + std::to_string(id.index);
    case FederateKind::der_aggregator:
        return "der_aggregator#" + std::to_string(id.index);
    }
    return "?";
}

const char* to_string(Topic t)
{
    switch (t) {
    case Topic::frequency:
        return "frequency";
    case Topic::ace:
        return "ace";
    case Topic::agc_command:
        return "agc_command";
    }
    return "?";
}

DelayChannel::DelayChannel(std::size_t index, FederateId sender, FederateId receiver, LinkParams link, std::uint64_t seed)
    : index_(index)
    , sender_(sender)
    , receiver_(receiver)
    , link_(link)
    , seed_(seed)
    , stream_(seed)
{
    try {
        link_.validate("channel " + std::to_string(index));
    } catch (const ConfigError& e) {
        throw InvalidArgument(e.what());
    }
}

SendResult DelayChannel::send(Topic topic, double value, double t)
{
    const double drop_draw = stream_.next();
    const double jitter_draw = stream_.next();

    SendResult out;
    out.message.seq = next_seq_++;
    out.message.channel = index_;
    out.message.sender = sender_;
    out.message.receiver = receiver_;
    out.message.topic = topic;
    out.message.value = value;
    out.message.send_time = t;
    const double jitter = link_.jitter_s * (2.0 * jitter_draw - 1.0);
    out.message.deliver_time = t + link_.delay_s + jitter;
    out.dropped = drop_draw < link_.drop_probability;
    return out;
}

Broker::Broker(double dt_cosim)
    : dt_cosim_(dt_cosim)
{
    if (!(std::isfinite(dt_cosim) && dt_cosim > 0.0))
        throw InvalidArgument("broker: dt_cosim must be > 0");
}

std::size_t Broker::add_channel(FederateId sender, FederateId receiver, LinkParams link, std::uint64_t seed)
{
    channels_.emplace_back(channels_.size(), sender, receiver, link, seed);
    return channels_.size() - 1;
}

bool Broker::send(std::size_t channel, Topic topic, double value)
{
    auto result = channels_.at(channel).send(topic, value, granted());
    ++sent_;
    if (result.dropped) {
        drops_.push_back(result.message);
        return false;
    }
    queue_.insert(result.message);
    return true;
}

Broker::Advance Broker::advance(double requested)
{
    const double expected = grant_time(grant_index_ + 1);
    if (std::abs(requested - expected) > kTimeEps)
        throw SchedulingError("broker: requested grant " + std::to_string(requested)
            + " breaks lockstep (expected " + std::to_string(expected) + ")");
    if (!queue_.empty() && due(*queue_.begin()))
        throw SchedulingError("broker: message on channel " + std::to_string(queue_.begin()->channel)
            + " due at " + std::to_string(queue_.begin()->deliver_time) + " was never released");

    ++grant_index_;
    Advance out;
    out.granted = granted();
    while (!queue_.empty() && due(*queue_.begin())) {
        out.delivered.push_back(*queue_.begin());
        deliveries_.push_back({*queue_.begin(), out.granted});
        queue_.erase(queue_.begin());
    }
    return out;
}

std::vector<Message> Broker::release(FederateId receiver)
{
    std::vector<Message> out;
    for (auto it = queue_.begin(); it != queue_.end() && due(*it);) {
        if (it->receiver == receiver) {
            out.push_back(*it);
            deliveries_.push_back({*it, granted()});
            it = queue_.erase(it);
        } else {
            ++it;
        }
    }
    return out;
}

std::vector<ChannelPlan> plan_channels(const Scenario& scenario)
{
    std::map<std::string, LinkParams> overrides;
    for (const auto& o : scenario.network.overrides)
        overrides[o.target] = o.link;
    auto link_for = [&](const std::string& label, const LinkParams& fallback) {
        auto it = overrides.find(label);
        return it == overrides.end() ? fallback : it->second;
    };

    const FederateId transmission{FederateKind::transmission, 0};
    const FederateId control{FederateKind::control_center, 0};

    std::vector<ChannelPlan> plans;
    plans.push_back({"uplink", transmission, control, link_for("uplink", scenario.network.uplink), 0});
    for (std::size_t i = 0; i < scenario.plant.governors.size(); ++i) {
        const auto& id = scenario.plant.governors[i].id;
        plans.push_back({id, control, {FederateKind::governor_agent, i}, link_for(id, scenario.network.governor), 0});
    }
    for (std::size_t a = 0; a < scenario.aggregators.size(); ++a) {
        const auto& id = scenario.aggregators[a];
        plans.push_back({id, control, {FederateKind::der_aggregator, a}, link_for(id, scenario.network.der), 0});
    }
    for (std::size_t c = 0; c < plans.size(); ++c)
        plans[c].seed = derive_seed(scenario.seed, {c});
    return plans;
}

std::vector<double> RunRecord::times() const
{
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples)
        out.push_back(s.t);
    return out;
}

std::vector<double> RunRecord::frequencies() const
{
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples)
        out.push_back(s.f_hz);
    return out;
}

namespace {

// Hosts the physical model. Publishes measurements on AGC ticks and
// integrates between grants with the agents' held commands.
class TransmissionFederate {
public:
    explicit TransmissionFederate(const Scenario& s)
        : plant_(s.plant)
        , state_(initial_state(s.plant))
        , events_(s.events)
        , inputs_(ControlInputs::zeros(s.plant))
    {
        for (std::size_t j = 0; j < plant_.ders.size(); ++j) {
            for (std::size_t a = 0; a < s.aggregators.size(); ++a) {
                if (s.aggregators[a] == plant_.ders[j].aggregator_id)
                    der_aggregator_.push_back(a);
            }
        }
        aggregator_size_.assign(s.aggregators.size(), 0);
        for (auto a : der_aggregator_)
            ++aggregator_size_[a];
    }

    const SystemState& state() const { return state_; }
    double f_hz() const { return state_.f_hz(plant_.swing); }

    void apply_due_events() { events_.apply_due(state_); }

    void set_inputs(const std::vector<double>& governor_cmd, const std::vector<double>& aggregator_cmd)
    {
        inputs_.governor_ext = governor_cmd;
        for (std::size_t j = 0; j < der_aggregator_.size(); ++j) {
            const auto a = der_aggregator_[j];
            inputs_.der_ext[j] = aggregator_cmd[a] / static_cast<double>(aggregator_size_[a]);
        }
    }

    // One integration step; events bind to the step's starting boundary.
    void step(double dt)
    {
        events_.apply_due(state_);
        state_ = rk4_step(state_, plant_, inputs_, dt);
    }

    void snap_time(double t) { state_.t = t; }

private:
    const Plant& plant_;
    SystemState state_;
    EventSchedule events_;
    ControlInputs inputs_;
    std::vector<std::size_t> der_aggregator_;
    std::vector<std::size_t> aggregator_size_;
};

// Runs the PI controller on each fresh uplink report and issues commands.
class ControlCenterFederate {
public:
    ControlCenterFederate(const Scenario& s)
        : agc_(s.agc)
        , s_base_mw_(s.plant.swing.s_base_mw)
        , ace_source_(s.network.ace_source)
    {
    }

    /// Returns the dispatched per-participant commands when the message
    /// produced a new PI tick.
    std::optional<std::vector<double>> receive(const Message& m, std::size_t& stale)
    {
        double ace = 0.0;
        if (ace_source_ == AceSource::transmission && m.topic == Topic::ace)
            ace = m.value;
        else if (ace_source_ == AceSource::control_center && m.topic == Topic::frequency)
            ace = compute_ace(m.value, agc_);
        else
            return std::nullopt;

        const auto tick = static_cast<std::int64_t>(std::llround(m.send_time / agc_.interval_s));
        if (state_.last_tick && tick <= *state_.last_tick) {
            ++stale;
            return std::nullopt;
        }
        auto out = pi_update(state_, ace, agc_, s_base_mw_, tick);
        state_ = out.state;
        return dispatch(out.command, agc_);
    }

    double last_command() const { return state_.last_command; }

private:
    const AgcConfig& agc_;
    double s_base_mw_;
    AceSource ace_source_;
    AgcState state_;
};

} // namespace

RunRecord run_federation(const Scenario& scenario)
{
    scenario.validate();

    const auto plans = plan_channels(scenario);
    Broker broker(scenario.dt_cosim_s);
    for (const auto& p : plans)
        broker.add_channel(p.sender, p.receiver, p.link, p.seed);

    const std::size_t n_gov = scenario.plant.governors.size();
    const std::size_t n_agg = scenario.aggregators.size();
    const std::size_t uplink = 0;
    auto downlink = [&](std::size_t participant) { return 1 + participant; };

    TransmissionFederate transmission(scenario);
    ControlCenterFederate control(scenario);
    std::vector<double> governor_held(n_gov, 0.0);
    std::vector<double> aggregator_held(n_agg, 0.0);

    const std::size_t grants = scenario.grant_count();
    const std::size_t substeps = scenario.substeps();
    const std::size_t per_interval = scenario.grants_per_interval();
    const double dt_cosim = scenario.dt_cosim_s;
    const double dt = scenario.dt_s;
    const bool agc_on = scenario.agc.enabled;

    RunRecord record;
    record.samples.reserve((grants + 1) * (scenario.full_rate ? substeps : 1));
    double ace_mw = 0.0;

    auto sample = [&](double t) {
        const auto& st = transmission.state();
        Sample s;
        s.t = t;
        s.f_hz = transmission.f_hz();
        s.df_pu = st.df_pu;
        s.ace_mw = ace_mw;
        s.agc_cmd_sent = control.last_command();
        for (double v : aggregator_held)
            s.agc_cmd_applied_der += v;
        for (double v : governor_held)
            s.agc_cmd_applied_gov += v;
        s.p_mech_total = st.p_mech_total();
        s.p_der_total = st.p_der_total();
        s.p_load = st.p_load;
        record.samples.push_back(s);
    };

    std::vector<Message> control_inbox;
    auto route = [&](const Message& m) {
        switch (m.receiver.kind) {
        case FederateKind::control_center:
            control_inbox.push_back(m);
            break;
        case FederateKind::governor_agent:
            governor_held[m.receiver.index] = m.value;
            break;
        case FederateKind::der_aggregator:
            aggregator_held[m.receiver.index] = m.value;
            break;
        case FederateKind::transmission:
            break;
        }
    };

    for (std::size_t k = 0; k <= grants; ++k) {
        const double t_k = static_cast<double>(k) * dt_cosim;

        // Deliveries already in flight land first; the control center's
        // share waits for its phase.
        if (k > 0) {
            for (const auto& m : broker.advance(t_k).delivered)
                route(m);
        }

        transmission.snap_time(t_k);
        transmission.apply_due_events();
        if (k % per_interval == 0) {
            ace_mw = compute_ace(transmission.f_hz(), scenario.agc);
            broker.send(uplink, Topic::frequency, transmission.f_hz());
            broker.send(uplink, Topic::ace, ace_mw);
        }

        for (const auto& m : broker.release({FederateKind::control_center, 0}))
            control_inbox.push_back(m);
        for (const auto& m : control_inbox) {
            if (!agc_on)
                continue;
            if (auto commands = control.receive(m, record.stale_ace)) {
                for (std::size_t p = 0; p < commands->size(); ++p)
                    broker.send(downlink(p), Topic::agc_command, (*commands)[p]);
            }
        }
        control_inbox.clear();

        for (std::size_t i = 0; i < n_gov; ++i) {
            for (const auto& m : broker.release({FederateKind::governor_agent, i}))
                route(m);
        }
        for (std::size_t a = 0; a < n_agg; ++a) {
            for (const auto& m : broker.release({FederateKind::der_aggregator, a}))
                route(m);
        }

        sample(t_k);
        if (k == grants)
            break;

        transmission.set_inputs(governor_held, aggregator_held);
        try {
            for (std::size_t j = 0; j < substeps; ++j) {
                transmission.step(dt);
                if (scenario.full_rate && j + 1 < substeps)
                    sample(t_k + static_cast<double>(j + 1) * dt);
            }
        } catch (const IntegrationDiverged& e) {
            record.diverged_at = e.time();
            record.diverged_message = e.what();
            break;
        }
    }

    // Drain commands still in flight so every send is accounted for as
    // delivered or dropped; late deliveries carry grants past the horizon.
    while (broker.in_flight() > 0)
        broker.advance(broker.granted() + dt_cosim);

    record.final_state = transmission.state();
    record.sent = broker.sent_count();
    record.deliveries = broker.deliveries();
    record.drops = broker.drops();
    return record;
}

} // namespace lfcsim
