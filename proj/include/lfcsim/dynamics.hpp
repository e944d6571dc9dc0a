#pragma once

// Aggregated single-area frequency response: swing equation, two-lag
// governor/turbine units and first-order DER units with deadband droop.
//
// All powers are p.u. on the system base. Frequency is carried as a p.u.
// deviation and only converted to Hz where the droop and ACE formulas are
// evaluated.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lfcsim {

inline constexpr double kNominalHz = 60.0;

struct SwingParams {
    double inertia_s = 5.0;  ///< H, seconds on system base
    double damping = 1.0;    ///< D, p.u. power per p.u. frequency
    double s_base_mw = 1000.0;
    double f0_hz = kNominalHz;

    void validate() const;
    bool operator==(const SwingParams&) const = default;
};

struct GovernorUnit {
    std::string id;
    double droop = 0.05;      ///< R, p.u. frequency per p.u. power
    double tg = 0.2;          ///< governor lag, s
    double tch = 5.0;         ///< turbine lag, s
    double p_ref = 0.0;
    double p_min = 0.0;
    double p_max = 1.0;

    void validate() const;
    bool operator==(const GovernorUnit&) const = default;
};

struct DerUnit {
    std::string id;
    std::string aggregator_id;
    double t_der = 0.5;       ///< output lag, s
    double d_dn = 20.0;       ///< underfrequency droop gain
    double d_up = 20.0;       ///< overfrequency droop gain
    double db_uf_hz = 0.036;
    double db_of_hz = 0.036;
    double p0 = 0.0;
    double p_mppt = 0.0;

    void validate() const;
    bool operator==(const DerUnit&) const = default;
};

/// The physical side of a scenario.
struct Plant {
    SwingParams swing;
    std::vector<GovernorUnit> governors;
    std::vector<DerUnit> ders;

    void validate() const;
    /// Load that balances the scheduled outputs (zero initial deviation).
    double balanced_load() const;
    bool operator==(const Plant&) const = default;
};

struct GovernorState {
    double p_valve = 0.0;
    double p_mech = 0.0;
    bool operator==(const GovernorState&) const = default;
};

struct SystemState {
    double t = 0.0;
    double df_pu = 0.0;
    std::vector<GovernorState> governors;
    std::vector<double> der_out;
    double p_load = 0.0;

    double f_hz(const SwingParams& swing) const { return swing.f0_hz * (1.0 + df_pu); }
    double p_mech_total() const;
    double p_der_total() const;
    bool all_finite() const;
    bool operator==(const SystemState&) const = default;
};

/// Time derivative of every continuous state in SystemState.
struct StateRate {
    double df_pu = 0.0;
    std::vector<GovernorState> governors;
    std::vector<double> der_out;
};

/// Supplementary setpoints (AGC p_ext) per unit, held across a step.
struct ControlInputs {
    std::vector<double> governor_ext;
    std::vector<double> der_ext;

    static ControlInputs zeros(const Plant& plant);
};

enum class EventKind { generation_outage, load_step };

struct Event {
    double time = 0.0;
    EventKind kind = EventKind::generation_outage;
    double magnitude = 0.0;  ///< p.u., positive = power deficit

    void validate() const;
    bool operator==(const Event&) const = default;
};

const char* to_string(EventKind kind);

/// Equilibrium state: zero deviation, every lag at its scheduled output.
SystemState initial_state(const Plant& plant);

/// DER droop contribution for a measured frequency in Hz.
///
/// Zero inside [nominal - db_uf, nominal + db_of]. Below the band the output
/// rises with gain d_dn; above it the output falls with gain d_up.
double pfr_droop(double f_hz, const DerUnit& unit, double nominal_hz = kNominalHz);

/// Setpoint tracked by the DER output lag, clamped to [0, p_mppt].
double der_target(const DerUnit& unit, double f_hz, double p_ext, double nominal_hz = kNominalHz);

StateRate derivatives(const SystemState& state, const Plant& plant, const ControlInputs& inputs);

/// x + h * k over every continuous state; t advances by h.
SystemState add_scaled(const SystemState& x, double h, const StateRate& k);

/// Hard upper bound on the integration step.
inline constexpr double kMaxStep = 0.1;

/// Classical RK4 advance with inputs held over the step. Limited states are
/// clamped after the step. Throws IntegrationDiverged on a non-finite result.
SystemState rk4_step(const SystemState& state, const Plant& plant, const ControlInputs& inputs, double dt);

/// Applies one event's power imbalance to the load.
SystemState apply_event(const SystemState& state, const Event& event);

/// Exactly-once event application bound to integration boundaries.
class EventSchedule {
public:
    EventSchedule() = default;
    explicit EventSchedule(std::vector<Event> events);

    /// Applies every pending event whose time is <= state.t, in time order.
    /// Returns the number applied.
    std::size_t apply_due(SystemState& state);

    /// Applies event `index` now. Throws if it was already applied.
    void apply(std::size_t index, SystemState& state);

    std::span<const Event> events() const { return events_; }
    bool applied(std::size_t index) const { return applied_.at(index); }

private:
    std::vector<Event> events_;
    std::vector<bool> applied_;
};

} // namespace lfcsim
