#include "lfcsim/agc.hpp"

#include "lfcsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace lfcsim {

void AgcConfig::validate() const
{
    if (!(std::isfinite(interval_s) && interval_s > 0.0))
        throw InvalidArgument("agc: interval must be > 0");
    if (!(std::isfinite(f_db_hz) && f_db_hz >= 0.0))
        throw InvalidArgument("agc: f_db must be >= 0");
    if (!std::isfinite(bias_mw_per_0p1hz) || !std::isfinite(kp) || !std::isfinite(ki))
        throw InvalidArgument("agc: B, Kp and Ki must be finite");
    if (!(u_min <= 0.0 && 0.0 <= u_max))
        throw InvalidArgument("agc: command limits must bracket 0");
    if (betas.empty())
        throw InvalidArgument("agc: no participation factors");
    for (double b : betas) {
        if (!(std::isfinite(b) && b >= 0.0))
            throw InvalidArgument("agc: participation factors must be >= 0");
    }
    const double sum = std::accumulate(betas.begin(), betas.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-9)
        throw InvalidArgument("agc: participation factors sum to " + std::to_string(sum) + ", expected 1");
}

double compute_ace(double f_meas_hz, const AgcConfig& cfg)
{
    const double error = f_meas_hz - cfg.f0_hz;
    if (std::abs(error) <= cfg.f_db_hz)
        return 0.0;
    return 10.0 * cfg.bias_mw_per_0p1hz * error;
}

PiOutput pi_update(const AgcState& state, double ace_mw, const AgcConfig& cfg, double s_base_mw, std::int64_t tick)
{
    if (state.last_tick && tick <= *state.last_tick)
        throw InvalidArgument("pi_update: tick " + std::to_string(tick) + " does not follow tick "
            + std::to_string(*state.last_tick));

    const double ace_pu = ace_mw / s_base_mw;
    const double increment = ace_pu * cfg.interval_s;

    double integrator = state.integrator + increment;
    const double raw = cfg.kp * ace_pu + cfg.ki * integrator;
    const double push = cfg.ki * increment;
    if ((raw > cfg.u_max && push > 0.0) || (raw < cfg.u_min && push < 0.0))
        integrator = state.integrator;

    const double command = std::clamp(raw, cfg.u_min, cfg.u_max);

    PiOutput out;
    out.state.integrator = integrator;
    out.state.last_tick = tick;
    out.state.last_command = command;
    out.command = command;
    return out;
}

std::vector<double> dispatch(double command, const AgcConfig& cfg)
{
    std::vector<double> out;
    out.reserve(cfg.betas.size());
    for (double b : cfg.betas)
        out.push_back(b * command);
    return out;
}

} // namespace lfcsim
