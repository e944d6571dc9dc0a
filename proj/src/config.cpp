#include "lfcsim/config.hpp"

#include "lfcsim/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace lfcsim {

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

std::optional<double> to_double(std::string_view s)
{
    s = trim(s);
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        return std::nullopt;
    return v;
}

struct Entry {
    std::string key;
    std::string value;
    int line = 0;
};

struct Block {
    std::string name;
    bool list = false;
    int line = 0;
    std::vector<Entry> entries;
};

std::string where(const Block& b, const Entry& e)
{
    const std::string sec = b.list ? "[[" + b.name + "]]" : "[" + b.name + "]";
    return "line " + std::to_string(e.line) + " " + sec + " " + e.key;
}

std::string where(const Block& b)
{
    const std::string sec = b.list ? "[[" + b.name + "]]" : "[" + b.name + "]";
    return "line " + std::to_string(b.line) + " " + sec;
}

std::vector<Block> tokenize(std::string_view text)
{
    std::vector<Block> blocks;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;

        const std::string loc = "line " + std::to_string(line_no);
        if (line.front() == '[') {
            Block b;
            b.line = line_no;
            if (line.size() >= 4 && line.substr(0, 2) == "[[" && line.substr(line.size() - 2) == "]]") {
                b.list = true;
                b.name = std::string(trim(line.substr(2, line.size() - 4)));
            } else if (line.back() == ']' && line.find(']') == line.size() - 1) {
                b.name = std::string(trim(line.substr(1, line.size() - 2)));
            } else {
                throw ConfigError(loc, "malformed section header");
            }
            if (b.name.empty())
                throw ConfigError(loc, "empty section name");
            blocks.push_back(std::move(b));
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(loc, "expected 'key = value'");
        if (blocks.empty())
            throw ConfigError(loc, "key outside of any section");
        Entry e{std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))), line_no};
        if (e.key.empty())
            throw ConfigError(loc, "empty key");
        if (e.value.empty())
            throw ConfigError(loc + " " + e.key, "empty value");
        for (const auto& prior : blocks.back().entries) {
            if (prior.key == e.key)
                throw ConfigError(where(blocks.back(), e), "duplicate key");
        }
        blocks.back().entries.push_back(std::move(e));
    }
    return blocks;
}

// Key table for one block: key -> setter taking the raw value.
using Setter = std::function<void(const std::string&)>;

class KeyTable {
public:
    explicit KeyTable(const Block& block)
        : block_(block)
    {
    }

    KeyTable& number(const std::string& key, double& target)
    {
        setters_[key] = [this, &target, key](const std::string& v) {
            const auto d = to_double(v);
            if (!d)
                throw ConfigError(loc(key), "expected a number, got '" + v + "'");
            target = *d;
        };
        return *this;
    }

    KeyTable& text(const std::string& key, std::string& target)
    {
        setters_[key] = [&target](const std::string& v) { target = v; };
        return *this;
    }

    KeyTable& flag(const std::string& key, bool& target)
    {
        setters_[key] = [this, &target, key](const std::string& v) {
            if (v == "true")
                target = true;
            else if (v == "false")
                target = false;
            else
                throw ConfigError(loc(key), "expected true or false, got '" + v + "'");
        };
        return *this;
    }

    KeyTable& custom(const std::string& key, std::function<void(const std::string&, const std::string&)> fn)
    {
        setters_[key] = [this, fn, key](const std::string& v) { fn(v, loc(key)); };
        return *this;
    }

    KeyTable& require(std::initializer_list<std::string> keys)
    {
        required_.insert(keys.begin(), keys.end());
        return *this;
    }

    void apply()
    {
        std::set<std::string> seen;
        for (const auto& e : block_.entries) {
            auto it = setters_.find(e.key);
            if (it == setters_.end())
                throw ConfigError(where(block_, e), "unknown key");
            it->second(e.value);
            seen.insert(e.key);
        }
        for (const auto& k : required_) {
            if (!seen.count(k))
                throw ConfigError(where(block_), "missing required key '" + k + "'");
        }
    }

    bool has(const std::string& key) const
    {
        for (const auto& e : block_.entries) {
            if (e.key == key)
                return true;
        }
        return false;
    }

private:
    std::string loc(const std::string& key) const
    {
        for (const auto& e : block_.entries) {
            if (e.key == key)
                return where(block_, e);
        }
        return where(block_) + " " + key;
    }

    const Block& block_;
    std::map<std::string, Setter> setters_;
    std::set<std::string> required_;
};

std::vector<double> grid_or_throw(const std::string& v, const std::string& loc)
{
    try {
        return parse_grid(v);
    } catch (const InvalidArgument& e) {
        throw ConfigError(loc, e.what());
    }
}

struct PendingChannel {
    std::string target;
    std::optional<double> delay, jitter, drop;
    std::string loc;
};

} // namespace

std::vector<double> parse_grid(std::string_view text)
{
    text = trim(text);
    if (text.empty())
        throw InvalidArgument("empty grid");
    std::vector<double> out;
    if (text.find(':') != std::string_view::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3)
            throw InvalidArgument("range must be start:step:stop");
        const auto a = to_double(parts[0]);
        const auto step = to_double(parts[1]);
        const auto b = to_double(parts[2]);
        if (!a || !step || !b || !std::isfinite(*a) || !std::isfinite(*b) || !(*step > 0.0) || *b < *a)
            throw InvalidArgument("range must be start:step:stop with step > 0 and stop >= start");
        const double n = std::round((*b - *a) / *step);
        if (std::abs((*b - *a) / *step - n) > 1e-9 * std::max(1.0, n))
            throw InvalidArgument("range step does not divide stop - start");
        if (n > 1e6)
            throw InvalidArgument("range has too many points");
        for (int i = 0; i <= static_cast<int>(n); ++i) {
            // Rounded to 12 decimals so 0:0.1:1 yields 0.3 rather than 0.30000000000000004.
            const double v = *a + i * *step;
            out.push_back(std::round(v * 1e12) / 1e12);
        }
        return out;
    }
    for (auto part : split(text, ',')) {
        const auto v = to_double(part);
        if (!v || !std::isfinite(*v))
            throw InvalidArgument("bad grid value '" + std::string(part) + "'");
        out.push_back(*v);
    }
    return out;
}

Scenario parse_scenario(std::string_view text)
{
    const auto blocks = tokenize(text);

    Scenario s;
    s.agc.f0_hz = s.plant.swing.f0_hz;
    std::set<std::string> singles_seen;
    std::optional<double> settle_band;
    std::string participation_text;
    std::string participation_loc = "[agc] participation";
    std::vector<PendingChannel> channels;

    static const std::set<std::string> singles = {"system", "agc", "network", "simulation", "detector", "sweep", "output"};
    static const std::set<std::string> lists = {"governor", "aggregator", "der", "event", "channel"};

    for (const auto& b : blocks) {
        if (b.list ? !lists.count(b.name) : !singles.count(b.name))
            throw ConfigError(where(b), "unknown section");
        if (!b.list && !singles_seen.insert(b.name).second)
            throw ConfigError(where(b), "section appears more than once");

        KeyTable keys(b);
        if (b.name == "system") {
            keys.number("h", s.plant.swing.inertia_s)
                .number("d", s.plant.swing.damping)
                .number("s_base", s.plant.swing.s_base_mw)
                .number("f0", s.plant.swing.f0_hz)
                .apply();
        } else if (b.name == "governor") {
            GovernorUnit g;
            keys.text("id", g.id)
                .number("r", g.droop)
                .number("tg", g.tg)
                .number("tch", g.tch)
                .number("p_ref", g.p_ref)
                .number("p_min", g.p_min)
                .number("p_max", g.p_max)
                .require({"id", "r", "tg", "tch", "p_ref"})
                .apply();
            s.plant.governors.push_back(g);
        } else if (b.name == "aggregator") {
            std::string id;
            keys.text("id", id).require({"id"}).apply();
            s.aggregators.push_back(id);
        } else if (b.name == "der") {
            DerUnit d;
            double count = 1.0;
            keys.text("id", d.id)
                .text("aggregator", d.aggregator_id)
                .number("t_der", d.t_der)
                .number("d_dn", d.d_dn)
                .number("d_up", d.d_up)
                .number("db_uf", d.db_uf_hz)
                .number("db_of", d.db_of_hz)
                .number("p0", d.p0)
                .number("p_mppt", d.p_mppt)
                .number("count", count)
                .require({"id", "aggregator", "p0", "p_mppt"})
                .apply();
            if (!keys.has("d_up"))
                d.d_up = d.d_dn;
            if (!(count >= 1.0 && count == std::floor(count) && count <= 1e6))
                throw ConfigError(where(b) + " count", "count must be a positive integer");
            if (count == 1.0) {
                s.plant.ders.push_back(d);
            } else {
                const std::string base = d.id;
                for (int i = 1; i <= static_cast<int>(count); ++i) {
                    d.id = base + "." + std::to_string(i);
                    s.plant.ders.push_back(d);
                }
            }
        } else if (b.name == "agc") {
            keys.flag("enabled", s.agc.enabled)
                .number("bias", s.agc.bias_mw_per_0p1hz)
                .number("f_db", s.agc.f_db_hz)
                .number("kp", s.agc.kp)
                .number("ki", s.agc.ki)
                .number("interval", s.agc.interval_s)
                .number("u_min", s.agc.u_min)
                .number("u_max", s.agc.u_max)
                .custom("participation",
                    [&](const std::string& v, const std::string& loc) {
                        participation_text = v;
                        participation_loc = loc;
                    })
                .custom("ace_source", [&](const std::string& v, const std::string& loc) {
                    if (v == "transmission")
                        s.network.ace_source = AceSource::transmission;
                    else if (v == "control_center")
                        s.network.ace_source = AceSource::control_center;
                    else
                        throw ConfigError(loc, "expected transmission or control_center");
                })
                .apply();
        } else if (b.name == "network") {
            auto& n = s.network;
            keys.number("uplink_delay", n.uplink.delay_s)
                .number("uplink_jitter", n.uplink.jitter_s)
                .number("uplink_drop", n.uplink.drop_probability)
                .number("governor_delay", n.governor.delay_s)
                .number("governor_jitter", n.governor.jitter_s)
                .number("governor_drop", n.governor.drop_probability)
                .number("der_delay", n.der.delay_s)
                .number("der_jitter", n.der.jitter_s)
                .number("der_drop", n.der.drop_probability)
                .apply();
        } else if (b.name == "channel") {
            PendingChannel c;
            c.loc = where(b);
            double delay = 0, jitter = 0, drop = 0;
            keys.text("target", c.target)
                .number("delay", delay)
                .number("jitter", jitter)
                .number("drop", drop)
                .require({"target"})
                .apply();
            if (keys.has("delay"))
                c.delay = delay;
            if (keys.has("jitter"))
                c.jitter = jitter;
            if (keys.has("drop"))
                c.drop = drop;
            channels.push_back(c);
        } else if (b.name == "event") {
            Event e;
            keys.number("time", e.time)
                .number("magnitude", e.magnitude)
                .custom("kind",
                    [&](const std::string& v, const std::string& loc) {
                        if (v == "generation_outage")
                            e.kind = EventKind::generation_outage;
                        else if (v == "load_step")
                            e.kind = EventKind::load_step;
                        else
                            throw ConfigError(loc, "expected generation_outage or load_step");
                    })
                .require({"time", "kind", "magnitude"})
                .apply();
            s.events.push_back(e);
        } else if (b.name == "simulation") {
            keys.number("horizon", s.horizon_s)
                .number("dt", s.dt_s)
                .number("dt_cosim", s.dt_cosim_s)
                .custom("seed",
                    [&](const std::string& v, const std::string& loc) {
                        std::uint64_t seed = 0;
                        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), seed);
                        if (ec != std::errc{} || ptr != v.data() + v.size())
                            throw ConfigError(loc, "expected an unsigned integer");
                        s.seed = seed;
                    })
                .apply();
        } else if (b.name == "detector") {
            double band = 0.0;
            keys.number("hard_bound", s.detector.hard_bound_hz)
                .number("window", s.detector.window_s)
                .number("growth_ratio", s.detector.growth_ratio)
                .number("amplitude_floor", s.detector.amplitude_floor_hz)
                .number("settle_band", band)
                .apply();
            if (keys.has("settle_band"))
                settle_band = band;
        } else if (b.name == "sweep") {
            keys.custom("kp", [&](const std::string& v, const std::string& loc) { s.sweep.kp = grid_or_throw(v, loc); })
                .custom("ki", [&](const std::string& v, const std::string& loc) { s.sweep.ki = grid_or_throw(v, loc); })
                .custom("delay",
                    [&](const std::string& v, const std::string& loc) { s.sweep.delay = grid_or_throw(v, loc); })
                .custom("delay_target",
                    [&](const std::string& v, const std::string& loc) {
                        if (v == "der")
                            s.sweep.delay_target = DelayTarget::der;
                        else if (v == "governor")
                            s.sweep.delay_target = DelayTarget::governor;
                        else if (v == "both")
                            s.sweep.delay_target = DelayTarget::both;
                        else
                            throw ConfigError(loc, "expected der, governor or both");
                    })
                .apply();
        } else if (b.name == "output") {
            keys.flag("full_rate", s.full_rate).apply();
        }
    }

    s.agc.f0_hz = s.plant.swing.f0_hz;
    s.detector.f0_hz = s.plant.swing.f0_hz;
    s.detector.settle_band_hz = settle_band.value_or(s.agc.f_db_hz);

    // Participation factors: "id:beta, id:beta"; unlisted participants get 0.
    std::vector<std::string> participant_ids;
    for (const auto& g : s.plant.governors)
        participant_ids.push_back(g.id);
    for (const auto& a : s.aggregators)
        participant_ids.push_back(a);
    s.agc.betas.assign(participant_ids.size(), 0.0);
    if (!participation_text.empty()) {
        std::set<std::string> listed;
        for (auto item : split(participation_text, ',')) {
            const auto colon = item.find(':');
            if (colon == std::string_view::npos)
                throw ConfigError(participation_loc, "expected id:factor pairs");
            const std::string id(trim(item.substr(0, colon)));
            const auto beta = to_double(item.substr(colon + 1));
            if (!beta)
                throw ConfigError(participation_loc, "bad factor for '" + id + "'");
            if (!listed.insert(id).second)
                throw ConfigError(participation_loc, "'" + id + "' listed twice");
            const auto it = std::find(participant_ids.begin(), participant_ids.end(), id);
            if (it == participant_ids.end())
                throw ConfigError(participation_loc, "unknown governor or aggregator '" + id + "'");
            s.agc.betas[static_cast<std::size_t>(it - participant_ids.begin())] = *beta;
        }
    }

    // Channel overrides inherit unspecified fields from their class.
    for (const auto& c : channels) {
        LinkParams base = s.network.der;
        if (c.target == "uplink")
            base = s.network.uplink;
        else if (std::any_of(s.plant.governors.begin(), s.plant.governors.end(),
                     [&](const GovernorUnit& g) { return g.id == c.target; }))
            base = s.network.governor;
        else if (std::find(s.aggregators.begin(), s.aggregators.end(), c.target) == s.aggregators.end())
            throw ConfigError(c.loc + " target", "unknown channel target '" + c.target + "'");
        ChannelOverride o{c.target, base};
        if (c.delay)
            o.link.delay_s = *c.delay;
        if (c.jitter)
            o.link.jitter_s = *c.jitter;
        if (c.drop)
            o.link.drop_probability = *c.drop;
        s.network.overrides.push_back(o);
    }

    s.validate();
    return s;
}

Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError(path.string(), "cannot open scenario file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s)
{
    std::ostringstream out;
    auto kv = [&](const char* key, double v) { out << key << " = " << format_double(v) << '\n'; };
    auto grid = [&](const char* key, const std::vector<double>& g) {
        if (g.empty())
            return;
        out << key << " = ";
        for (std::size_t i = 0; i < g.size(); ++i)
            out << (i ? ", " : "") << format_double(g[i]);
        out << '\n';
    };

    out << "[system]\n";
    kv("h", s.plant.swing.inertia_s);
    kv("d", s.plant.swing.damping);
    kv("s_base", s.plant.swing.s_base_mw);
    kv("f0", s.plant.swing.f0_hz);

    for (const auto& g : s.plant.governors) {
        out << "\n[[governor]]\nid = " << g.id << '\n';
        kv("r", g.droop);
        kv("tg", g.tg);
        kv("tch", g.tch);
        kv("p_ref", g.p_ref);
        kv("p_min", g.p_min);
        kv("p_max", g.p_max);
    }
    for (const auto& a : s.aggregators)
        out << "\n[[aggregator]]\nid = " << a << '\n';
    for (const auto& d : s.plant.ders) {
        out << "\n[[der]]\nid = " << d.id << "\naggregator = " << d.aggregator_id << '\n';
        kv("t_der", d.t_der);
        kv("d_dn", d.d_dn);
        kv("d_up", d.d_up);
        kv("db_uf", d.db_uf_hz);
        kv("db_of", d.db_of_hz);
        kv("p0", d.p0);
        kv("p_mppt", d.p_mppt);
    }

    out << "\n[agc]\nenabled = " << (s.agc.enabled ? "true" : "false") << '\n';
    kv("bias", s.agc.bias_mw_per_0p1hz);
    kv("f_db", s.agc.f_db_hz);
    kv("kp", s.agc.kp);
    kv("ki", s.agc.ki);
    kv("interval", s.agc.interval_s);
    kv("u_min", s.agc.u_min);
    kv("u_max", s.agc.u_max);
    {
        std::vector<std::string> ids;
        for (const auto& g : s.plant.governors)
            ids.push_back(g.id);
        ids.insert(ids.end(), s.aggregators.begin(), s.aggregators.end());
        out << "participation = ";
        for (std::size_t i = 0; i < ids.size() && i < s.agc.betas.size(); ++i)
            out << (i ? ", " : "") << ids[i] << ':' << format_double(s.agc.betas[i]);
        out << '\n';
    }
    out << "ace_source = " << to_string(s.network.ace_source) << '\n';

    out << "\n[network]\n";
    kv("uplink_delay", s.network.uplink.delay_s);
    kv("uplink_jitter", s.network.uplink.jitter_s);
    kv("uplink_drop", s.network.uplink.drop_probability);
    kv("governor_delay", s.network.governor.delay_s);
    kv("governor_jitter", s.network.governor.jitter_s);
    kv("governor_drop", s.network.governor.drop_probability);
    kv("der_delay", s.network.der.delay_s);
    kv("der_jitter", s.network.der.jitter_s);
    kv("der_drop", s.network.der.drop_probability);
    for (const auto& o : s.network.overrides) {
        out << "\n[[channel]]\ntarget = " << o.target << '\n';
        kv("delay", o.link.delay_s);
        kv("jitter", o.link.jitter_s);
        kv("drop", o.link.drop_probability);
    }

    for (const auto& e : s.events) {
        out << "\n[[event]]\n";
        kv("time", e.time);
        out << "kind = " << to_string(e.kind) << '\n';
        kv("magnitude", e.magnitude);
    }

    out << "\n[simulation]\n";
    kv("horizon", s.horizon_s);
    kv("dt", s.dt_s);
    kv("dt_cosim", s.dt_cosim_s);
    out << "seed = " << s.seed << '\n';

    out << "\n[detector]\n";
    kv("hard_bound", s.detector.hard_bound_hz);
    kv("window", s.detector.window_s);
    kv("growth_ratio", s.detector.growth_ratio);
    kv("amplitude_floor", s.detector.amplitude_floor_hz);
    kv("settle_band", s.detector.settle_band_hz);

    out << "\n[sweep]\n";
    grid("kp", s.sweep.kp);
    grid("ki", s.sweep.ki);
    grid("delay", s.sweep.delay);
    out << "delay_target = " << to_string(s.sweep.delay_target) << '\n';

    out << "\n[output]\nfull_rate = " << (s.full_rate ? "true" : "false") << '\n';
    return out.str();
}

} // namespace lfcsim
