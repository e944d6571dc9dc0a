#pragma once

// Full experiment description shared by the federation, the sweep runner
// and the command-line tool.

#include "lfcsim/agc.hpp"
#include "lfcsim/dynamics.hpp"
#include "lfcsim/stability.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lfcsim {

struct LinkParams {
    double delay_s = 0.0;
    double jitter_s = 0.0;     ///< uniform half-width
    double drop_probability = 0.0;

    void validate(const std::string& where) const;
    bool operator==(const LinkParams&) const = default;
};

/// Per-channel override. `target` is "uplink", a governor id or an aggregator id.
struct ChannelOverride {
    std::string target;
    LinkParams link;
    bool operator==(const ChannelOverride&) const = default;
};

/// Where the ACE signal is formed.
enum class AceSource { transmission, control_center };

struct NetworkConfig {
    LinkParams uplink;
    LinkParams governor;
    LinkParams der;
    std::vector<ChannelOverride> overrides;
    AceSource ace_source = AceSource::transmission;
    bool operator==(const NetworkConfig&) const = default;
};

/// Which downlinks a delay sweep substitutes.
enum class DelayTarget { der, governor, both };

struct SweepConfig {
    std::vector<double> kp;
    std::vector<double> ki;
    std::vector<double> delay;
    DelayTarget delay_target = DelayTarget::der;
    bool operator==(const SweepConfig&) const = default;
};

struct Scenario {
    Plant plant;
    std::vector<std::string> aggregators;
    AgcConfig agc;                 ///< betas: governors first, then aggregators
    NetworkConfig network;
    std::vector<Event> events;
    double horizon_s = 120.0;
    double dt_s = 0.01;
    double dt_cosim_s = 0.1;
    std::uint64_t seed = 1;
    DetectorConfig detector;
    SweepConfig sweep;
    bool full_rate = false;

    /// Throws ConfigError naming the offending section.
    void validate() const;
    bool operator==(const Scenario&) const = default;

    std::size_t participant_count() const { return plant.governors.size() + aggregators.size(); }
    /// Number of integration steps per co-simulation step.
    std::size_t substeps() const;
    /// Number of co-simulation steps per AGC interval.
    std::size_t grants_per_interval() const;
    std::size_t grant_count() const;
};

const char* to_string(AceSource s);
const char* to_string(DelayTarget d);

/// Copy of `s` with new PI gains.
Scenario with_gains(const Scenario& s, double kp, double ki);

/// Copy of `s` with every downlink of the sweep's delay target set to `delay`.
Scenario with_delay(const Scenario& s, double delay, DelayTarget target);

/// Number of integer steps of `step` that fit in `span`, or 0 when `step`
/// does not divide `span` within 1e-9 relative.
std::size_t exact_ratio(double span, double step);

} // namespace lfcsim
