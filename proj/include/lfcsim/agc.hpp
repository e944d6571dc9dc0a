#pragma once

// Discrete secondary frequency control: ACE estimation, a PI controller
// sampled on a fixed interval, and participation-factor dispatch.

#include <cstdint>
#include <optional>
#include <vector>

namespace lfcsim {

struct AgcConfig {
    bool enabled = true;
    double bias_mw_per_0p1hz = -50.0;  ///< B, signed; negative raises on underfrequency
    double f0_hz = 60.0;
    double f_db_hz = 0.0;              ///< deadband on the frequency error
    double kp = 0.2;
    double ki = 0.2;
    double interval_s = 4.0;
    double u_min = -1.0;               ///< command limits, p.u.
    double u_max = 1.0;
    std::vector<double> betas;         ///< participation factor per controllable unit

    void validate() const;
    bool operator==(const AgcConfig&) const = default;
};

struct AgcState {
    double integrator = 0.0;             ///< accumulated ACE * time, p.u. * s
    std::optional<std::int64_t> last_tick;
    double last_command = 0.0;

    bool operator==(const AgcState&) const = default;
};

struct PiOutput {
    AgcState state;
    double command = 0.0;
};

/// ACE in MW: 10 * B * (f - f0), or 0 when |f - f0| <= f_db.
double compute_ace(double f_meas_hz, const AgcConfig& cfg);

/// One PI tick. The integrator advances by ace_pu * interval unless the
/// command is saturated in the direction the integration would push it.
/// Throws InvalidArgument when `tick` does not follow the last tick.
PiOutput pi_update(const AgcState& state, double ace_mw, const AgcConfig& cfg, double s_base_mw, std::int64_t tick);

/// Splits a command across units by participation factor.
std::vector<double> dispatch(double command, const AgcConfig& cfg);

} // namespace lfcsim
