#pragma once

// Lockstep co-simulation kernel. A broker grants time in fixed steps and
// carries timestamped scalar messages over delay channels between the
// transmission federate, the control center and the command agents.

#include "lfcsim/rng.hpp"
#include "lfcsim/scenario.hpp"

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace lfcsim {

enum class FederateKind { transmission, control_center, governor_agent, der_aggregator };

struct FederateId {
    FederateKind kind = FederateKind::transmission;
    std::size_t index = 0;

    auto operator<=>(const FederateId&) const = default;
};

std::string to_string(FederateId id);

enum class Topic { frequency, ace, agc_command };

const char* to_string(Topic t);

struct Message {
    std::uint64_t seq = 0;       ///< per channel, strictly increasing
    std::size_t channel = 0;
    FederateId sender;
    FederateId receiver;
    Topic topic = Topic::frequency;
    double value = 0.0;
    double send_time = 0.0;
    double deliver_time = 0.0;

    bool operator==(const Message&) const = default;
};

struct SendResult {
    Message message;
    bool dropped = false;
};

/// One directed link with base delay, uniform jitter and Bernoulli loss.
///
/// Every send draws exactly two uniforms from the channel's stream: the
/// first decides the drop, the second the jitter.
class DelayChannel {
public:
    DelayChannel(std::size_t index, FederateId sender, FederateId receiver, LinkParams link, std::uint64_t seed);

    SendResult send(Topic topic, double value, double t);

    std::size_t index() const { return index_; }
    FederateId sender() const { return sender_; }
    FederateId receiver() const { return receiver_; }
    const LinkParams& link() const { return link_; }
    std::uint64_t seed() const { return seed_; }

private:
    std::size_t index_;
    FederateId sender_;
    FederateId receiver_;
    LinkParams link_;
    std::uint64_t seed_;
    UniformStream stream_;
    std::uint64_t next_seq_ = 0;
};

/// A released message together with the grant at which it landed.
struct Delivery {
    Message message;
    double grant = 0.0;

    bool operator==(const Delivery&) const = default;
};

/// Owns the in-flight queue and the federation clock.
class Broker {
public:
    /// Tolerance when comparing a deliver time against a grant boundary.
    static constexpr double kTimeEps = 1e-9;

    explicit Broker(double dt_cosim);

    std::size_t add_channel(FederateId sender, FederateId receiver, LinkParams link, std::uint64_t seed);
    const DelayChannel& channel(std::size_t index) const { return channels_.at(index); }
    std::size_t channel_count() const { return channels_.size(); }

    /// Sends on `channel` at the current grant. Returns false when dropped.
    bool send(std::size_t channel, Topic topic, double value);

    struct Advance {
        double granted = 0.0;
        std::vector<Message> delivered;
    };

    /// Lockstep grant of `requested` (must be the current grant + dt_cosim).
    /// Releases every message due at the new grant in (deliver_time,
    /// channel, seq) order. Throws SchedulingError on a lockstep violation or
    /// when messages due at the current grant were never released.
    Advance advance(double requested);

    /// Releases messages for `receiver` that are due at the current grant.
    std::vector<Message> release(FederateId receiver);

    double granted() const { return grant_time(grant_index_); }
    std::uint64_t grant_index() const { return grant_index_; }
    double dt_cosim() const { return dt_cosim_; }
    std::size_t in_flight() const { return queue_.size(); }

    std::size_t sent_count() const { return sent_; }
    const std::vector<Delivery>& deliveries() const { return deliveries_; }
    const std::vector<Message>& drops() const { return drops_; }

private:
    struct QueueOrder {
        bool operator()(const Message& a, const Message& b) const
        {
            if (a.deliver_time != b.deliver_time)
                return a.deliver_time < b.deliver_time;
            if (a.channel != b.channel)
                return a.channel < b.channel;
            return a.seq < b.seq;
        }
    };

    double grant_time(std::uint64_t index) const { return static_cast<double>(index) * dt_cosim_; }
    bool due(const Message& m) const { return m.deliver_time <= granted() + kTimeEps; }

    double dt_cosim_;
    std::uint64_t grant_index_ = 0;
    std::vector<DelayChannel> channels_;
    std::set<Message, QueueOrder> queue_;
    std::size_t sent_ = 0;
    std::vector<Delivery> deliveries_;
    std::vector<Message> drops_;
};

/// Planned link for one channel of a scenario's federation.
struct ChannelPlan {
    std::string label;  ///< "uplink", or the governor / aggregator id
    FederateId sender;
    FederateId receiver;
    LinkParams link;
    std::uint64_t seed = 0;
};

/// Channel 0 is the measurement uplink, then one downlink per governor
/// agent, then one per DER aggregator.
std::vector<ChannelPlan> plan_channels(const Scenario& scenario);

/// One recorded row of a run.
struct Sample {
    double t = 0.0;
    double f_hz = 0.0;
    double df_pu = 0.0;
    double ace_mw = 0.0;
    double agc_cmd_sent = 0.0;
    double agc_cmd_applied_der = 0.0;
    double agc_cmd_applied_gov = 0.0;
    double p_mech_total = 0.0;
    double p_der_total = 0.0;
    double p_load = 0.0;

    bool operator==(const Sample&) const = default;
};

struct RunRecord {
    std::vector<Sample> samples;
    std::vector<Delivery> deliveries;
    std::vector<Message> drops;
    std::size_t sent = 0;
    std::size_t stale_ace = 0;  ///< uplink reports ignored as out of order
    SystemState final_state;    ///< plant state at the last recorded grant
    std::optional<double> diverged_at;
    std::string diverged_message;

    bool diverged() const { return diverged_at.has_value(); }
    std::vector<double> times() const;
    std::vector<double> frequencies() const;
};

/// Runs the full federation for `scenario` (validated first).
RunRecord run_federation(const Scenario& scenario);

} // namespace lfcsim
