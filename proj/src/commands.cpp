#include "lfcsim/commands.hpp"

#include "lfcsim/config.hpp"
#include "lfcsim/errors.hpp"

#include <fstream>
#include <ostream>

namespace lfcsim {

namespace {

std::string margin_text(const std::optional<double>& m)
{
    return m ? format_double(*m) : "nan";
}

std::string intervals_text(const FeasibleSet& fs)
{
    std::string out;
    for (std::size_t i = 0; i < fs.intervals.size(); ++i) {
        if (i)
            out += ';';
        out += format_double(fs.intervals[i].lo) + ':' + format_double(fs.intervals[i].hi);
    }
    return out;
}

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw Error("cannot write " + path.string());
    return os;
}

void write_meta(const std::filesystem::path& path, const std::string& command, const std::filesystem::path& config,
    const Scenario& s, const std::string& extra)
{
    auto os = open_out(path);
    os << "tool = " << kToolVersion << '\n';
    os << "command = " << command << '\n';
    os << "config = " << config.string() << '\n';
    os << "\n# channel seeds (derived from simulation.seed)\n";
    for (const auto& p : plan_channels(s))
        os << "channel." << p.label << ".seed = " << p.seed << '\n';
    os << extra;
    os << "\n# resolved scenario\n" << serialize_scenario(s);
}

} // namespace

void write_timeseries_csv(std::ostream& os, const RunRecord& record)
{
    os << "t,f_hz,df_pu,ace_mw,agc_cmd_sent,agc_cmd_applied_der,agc_cmd_applied_gov,p_mech_total,p_der_total,p_load\n";
    for (const auto& s : record.samples) {
        os << format_double(s.t) << ',' << format_double(s.f_hz) << ',' << format_double(s.df_pu) << ','
           << format_double(s.ace_mw) << ',' << format_double(s.agc_cmd_sent) << ','
           << format_double(s.agc_cmd_applied_der) << ',' << format_double(s.agc_cmd_applied_gov) << ','
           << format_double(s.p_mech_total) << ',' << format_double(s.p_der_total) << ','
           << format_double(s.p_load) << '\n';
    }
}

void write_sweep_csv(std::ostream& os, const std::vector<FeasibleSet>& rows)
{
    os << "kp,ki,delay,verdict,reason,peak_df,lower_margin,upper_margin,intervals\n";
    for (const auto& fs : rows) {
        const auto lower = margin_text(fs.lower_margin());
        const auto upper = margin_text(fs.upper_margin());
        const auto intervals = intervals_text(fs);
        for (const auto& p : fs.points) {
            os << format_double(fs.kp) << ',' << format_double(fs.ki) << ',' << format_double(p.delay) << ','
               << to_string(p.verdict.verdict) << ',' << to_string(p.verdict.reason) << ','
               << format_double(p.verdict.peak_abs_df_hz) << ',' << lower << ',' << upper << ',' << intervals
               << '\n';
        }
    }
}

void write_surfaces_csv(std::ostream& os, const std::vector<FeasibleSet>& rows)
{
    os << "kp,ki,lower_margin,upper_margin\n";
    for (const auto& fs : rows) {
        os << format_double(fs.kp) << ',' << format_double(fs.ki) << ',' << margin_text(fs.lower_margin()) << ','
           << margin_text(fs.upper_margin()) << '\n';
    }
}

void write_verdict(std::ostream& os, const StabilityVerdict& v, const RunRecord& record, const DetectorConfig& d)
{
    os << "verdict = " << to_string(v.verdict) << '\n';
    os << "reason = " << to_string(v.reason) << '\n';
    os << "peak_df_hz = " << format_double(v.peak_abs_df_hz) << '\n';
    os << "envelope_ratio = " << format_double(v.envelope_ratio) << '\n';
    os << "diverged_at = " << (record.diverged() ? format_double(*record.diverged_at) : "none") << '\n';
    os << "hard_bound_hz = " << format_double(d.hard_bound_hz) << '\n';
    os << "window_s = " << format_double(d.window_s) << '\n';
    os << "growth_ratio = " << format_double(d.growth_ratio) << '\n';
    os << "amplitude_floor_hz = " << format_double(d.amplitude_floor_hz) << '\n';
    os << "settle_band_hz = " << format_double(d.settle_band_hz) << '\n';
}

int cmd_validate(const std::filesystem::path& config, std::ostream& out, std::ostream& err)
{
    try {
        const auto s = load_scenario(config);
        out << config.string() << ": ok (" << s.plant.governors.size() << " governors, " << s.aggregators.size()
            << " aggregators, " << s.plant.ders.size() << " DER units)\n";
        return kExitStable;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
}

int cmd_run(const std::filesystem::path& config, const std::filesystem::path& out_dir, bool full_rate,
    std::ostream& out, std::ostream& err)
{
    try {
        auto s = load_scenario(config);
        if (full_rate)
            s.full_rate = true;
        const auto record = run_federation(s);
        const auto verdict = classify_run(s, record);

        std::filesystem::create_directories(out_dir);
        {
            auto os = open_out(out_dir / "timeseries.csv");
            write_timeseries_csv(os, record);
        }
        {
            auto os = open_out(out_dir / "verdict.txt");
            write_verdict(os, verdict, record, s.detector);
        }
        write_meta(out_dir / "meta.txt", "run", config, s, "");

        out << to_string(verdict.verdict) << " (" << to_string(verdict.reason) << "), peak |df| "
            << format_double(verdict.peak_abs_df_hz) << " Hz\n";
        return verdict.stable() ? kExitStable : kExitUnstable;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
}

int cmd_sweep(const SweepRequest& request, std::ostream& out, std::ostream& err)
{
    try {
        const auto s = load_scenario(request.config);
        const auto kp = request.kp.value_or(s.sweep.kp);
        const auto ki = request.ki.value_or(s.sweep.ki);
        const auto delay = request.delay.value_or(s.sweep.delay);
        if (kp.empty() || ki.empty() || delay.empty())
            throw ConfigError("[sweep]", "kp, ki and delay grids are required (flags or config)");

        require_stable_baseline(s);
        const auto rows = sweep_feasible_space(s, kp, ki, delay, request.jobs);

        std::filesystem::create_directories(request.out_dir);
        {
            auto os = open_out(request.out_dir / "sweep.csv");
            write_sweep_csv(os, rows);
        }
        {
            auto os = open_out(request.out_dir / "surfaces.csv");
            write_surfaces_csv(os, rows);
        }

        std::string extra = "\n# sweep grids\n";
        auto grid_line = [&](const char* name, const std::vector<double>& g) {
            extra += std::string("grid.") + name + " = ";
            for (std::size_t i = 0; i < g.size(); ++i)
                extra += (i ? ", " : "") + format_double(g[i]);
            extra += '\n';
        };
        grid_line("kp", kp);
        grid_line("ki", ki);
        grid_line("delay", delay);
        extra += "\n# per-point seeds: point.<kp_index>.<ki_index>.<delay_index>.seed\n";
        for (std::size_t i = 0; i < kp.size(); ++i) {
            for (std::size_t j = 0; j < ki.size(); ++j) {
                for (std::size_t d = 0; d < delay.size(); ++d) {
                    extra += "point." + std::to_string(i) + '.' + std::to_string(j) + '.' + std::to_string(d)
                        + ".seed = " + std::to_string(point_seed(s.seed, {i, j}, d)) + '\n';
                }
            }
        }
        write_meta(request.out_dir / "meta.txt", "sweep", request.config, s, extra);

        out << rows.size() << " (kp, ki) cells, " << delay.size() << " delays each\n";
        return kExitStable;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
}

} // namespace lfcsim
