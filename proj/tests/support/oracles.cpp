#include "oracles.hpp"

#include "lfcsim/agc.hpp"
#include "lfcsim/dynamics.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#ifndef LFCSIM_SOURCE_DIR
#error "LFCSIM_SOURCE_DIR must point at the repository root"
#endif

namespace lfcsim::testing {

MonolithicRun run_monolithic(const Scenario& s)
{
    s.validate();
    const Plant& plant = s.plant;
    const std::size_t n_gov = plant.governors.size();
    const std::size_t n_agg = s.aggregators.size();

    std::vector<std::size_t> owner(plant.ders.size());
    std::vector<double> members(n_agg, 0.0);
    for (std::size_t j = 0; j < plant.ders.size(); ++j) {
        for (std::size_t a = 0; a < n_agg; ++a) {
            if (s.aggregators[a] == plant.ders[j].aggregator_id)
                owner[j] = a;
        }
        members[owner[j]] += 1.0;
    }

    SystemState x = initial_state(plant);
    EventSchedule events(s.events);
    AgcState agc;
    std::vector<double> held(n_gov + n_agg, 0.0);
    double ace = 0.0;

    const std::size_t grants = s.grant_count();
    const std::size_t substeps = s.substeps();
    const std::size_t per_interval = s.grants_per_interval();

    MonolithicRun out;
    for (std::size_t k = 0; k <= grants; ++k) {
        x.t = static_cast<double>(k) * s.dt_cosim_s;
        events.apply_due(x);

        if (k % per_interval == 0) {
            ace = compute_ace(x.f_hz(plant.swing), s.agc);
            if (s.agc.enabled) {
                const auto tick = static_cast<std::int64_t>(k / per_interval);
                const auto pi = pi_update(agc, ace, s.agc, plant.swing.s_base_mw, tick);
                agc = pi.state;
                held = dispatch(pi.command, s.agc);
            }
        }

        Sample row;
        row.t = x.t;
        row.f_hz = x.f_hz(plant.swing);
        row.df_pu = x.df_pu;
        row.ace_mw = ace;
        row.agc_cmd_sent = agc.last_command;
        for (std::size_t i = 0; i < n_gov; ++i)
            row.agc_cmd_applied_gov += held[i];
        for (std::size_t a = 0; a < n_agg; ++a)
            row.agc_cmd_applied_der += held[n_gov + a];
        row.p_mech_total = x.p_mech_total();
        row.p_der_total = x.p_der_total();
        row.p_load = x.p_load;
        out.samples.push_back(row);
        if (k == grants)
            break;

        ControlInputs u = ControlInputs::zeros(plant);
        for (std::size_t i = 0; i < n_gov; ++i)
            u.governor_ext[i] = held[i];
        for (std::size_t j = 0; j < plant.ders.size(); ++j)
            u.der_ext[j] = held[n_gov + owner[j]] / members[owner[j]];
        for (std::size_t j = 0; j < substeps; ++j) {
            events.apply_due(x);
            x = rk4_step(x, plant, u, s.dt_s);
        }
    }
    out.final_state = x;
    return out;
}

double droop_equilibrium(const Plant& plant, double delta_p)
{
    double stiffness = plant.swing.damping;
    for (const auto& g : plant.governors)
        stiffness += 1.0 / g.droop;
    for (const auto& d : plant.ders)
        stiffness += d.d_dn;
    return -delta_p / stiffness;
}

double droop_equilibrium_with_deadband(const Plant& plant, double delta_p)
{
    const double f0 = plant.swing.f0_hz;
    // Net surplus at a held deviation; decreasing in df.
    auto surplus = [&](double df) {
        double p = -delta_p - plant.swing.damping * df;
        for (const auto& g : plant.governors)
            p -= df / g.droop;
        const double f = f0 * (1.0 + df);
        for (const auto& d : plant.ders) {
            const double lo = f0 - d.db_uf_hz;
            const double hi = f0 + d.db_of_hz;
            if (f < lo)
                p += (lo - f) / f0 * d.d_dn;
            else if (f > hi)
                p -= (f - hi) / f0 * d.d_up;
        }
        return p;
    };
    double a = -1.0;
    double b = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (a + b);
        (surplus(m) > 0.0 ? a : b) = m;
    }
    return 0.5 * (a + b);
}

std::filesystem::path scenario_path(const std::string& name)
{
    return std::filesystem::path(LFCSIM_SOURCE_DIR) / "scenarios" / name;
}

std::string read_scenario_text(const std::string& name)
{
    std::ifstream in(scenario_path(name));
    if (!in)
        throw std::runtime_error("cannot read scenario " + name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path fresh_dir(const std::string& tag)
{
    static std::atomic<int> counter{0};
    auto dir = std::filesystem::temp_directory_path()
        / ("lfcsim_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string set_key(std::string text, const std::string& key, const std::string& value)
{
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::size_t p = pos;
        while (p < end && (text[p] == ' ' || text[p] == '\t'))
            ++p;
        if (text.compare(p, key.size(), key) == 0) {
            std::size_t q = p + key.size();
            while (q < end && (text[q] == ' ' || text[q] == '\t'))
                ++q;
            if (q < end && text[q] == '=') {
                text.replace(pos, end - pos, key + " = " + value);
                return text;
            }
        }
        pos = end + 1;
    }
    throw std::runtime_error("key not found: " + key);
}

} // namespace lfcsim::testing
