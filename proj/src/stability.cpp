#include "lfcsim/stability.hpp"

#include "lfcsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lfcsim {

void DetectorConfig::validate() const
{
    if (!(std::isfinite(hard_bound_hz) && hard_bound_hz > 0.0))
        throw InvalidArgument("detector: hard_bound must be > 0");
    if (!(std::isfinite(window_s) && window_s > 0.0))
        throw InvalidArgument("detector: window must be > 0");
    if (!(std::isfinite(growth_ratio) && growth_ratio >= 1.0))
        throw InvalidArgument("detector: growth_ratio must be >= 1");
    if (!(std::isfinite(amplitude_floor_hz) && amplitude_floor_hz >= 0.0))
        throw InvalidArgument("detector: amplitude_floor must be >= 0");
    if (!(std::isfinite(settle_band_hz) && settle_band_hz >= 0.0))
        throw InvalidArgument("detector: settle_band must be >= 0");
}

const char* to_string(Verdict v)
{
    return v == Verdict::stable ? "stable" : "unstable";
}

const char* to_string(VerdictReason r)
{
    switch (r) {
    case VerdictReason::bound_exceeded:
        return "bound_exceeded";
    case VerdictReason::growing_envelope:
        return "growing_envelope";
    case VerdictReason::diverged:
        return "diverged";
    case VerdictReason::settled:
        return "settled";
    case VerdictReason::bounded_nongrowing:
        return "bounded_nongrowing";
    }
    return "?";
}

namespace {

// Peak-to-peak of samples with t in [lo, hi].
double peak_to_peak(std::span<const double> t, std::span<const double> f, double lo, double hi)
{
    double mn = std::numeric_limits<double>::infinity();
    double mx = -mn;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < lo || t[i] > hi)
            continue;
        mn = std::min(mn, f[i]);
        mx = std::max(mx, f[i]);
    }
    return mx >= mn ? mx - mn : 0.0;
}

} // namespace

StabilityVerdict detect_instability(std::span<const double> t, std::span<const double> f_hz, bool diverged,
    const DetectorConfig& cfg)
{
    cfg.validate();
    if (t.size() != f_hz.size())
        throw InvalidArgument("detect_instability: time and frequency series differ in length");

    StabilityVerdict v;
    for (double f : f_hz) {
        const double dev = std::abs(f - cfg.f0_hz);
        v.peak_abs_df_hz = std::isfinite(dev) ? std::max(v.peak_abs_df_hz, dev) : std::numeric_limits<double>::infinity();
    }

    if (diverged) {
        v.verdict = Verdict::unstable;
        v.reason = VerdictReason::diverged;
        return v;
    }

    constexpr double kEps = 1e-9;
    if (t.size() < 2 || t.back() - t.front() < 2.0 * cfg.window_s - kEps)
        throw InvalidArgument("detect_instability: series is shorter than two detector windows");

    const double end = t.back();
    const double split = end - cfg.window_s;
    const double final_p2p = peak_to_peak(t, f_hz, split, end);
    // The preceding window stops just short of the split so the shared
    // boundary sample is counted once, in the final window.
    const double prior_p2p = peak_to_peak(t, f_hz, split - cfg.window_s, std::nextafter(split, -1.0));
    if (prior_p2p > 0.0)
        v.envelope_ratio = final_p2p / prior_p2p;
    else
        v.envelope_ratio = final_p2p > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;

    if (v.envelope_ratio > cfg.growth_ratio && final_p2p > cfg.amplitude_floor_hz) {
        v.verdict = Verdict::unstable;
        v.reason = VerdictReason::growing_envelope;
    } else if (v.peak_abs_df_hz > cfg.hard_bound_hz) {
        v.verdict = Verdict::unstable;
        v.reason = VerdictReason::bound_exceeded;
    } else {
        v.verdict = Verdict::stable;
        v.reason = std::abs(f_hz.back() - cfg.f0_hz) < cfg.settle_band_hz ? VerdictReason::settled
                                                                            : VerdictReason::bounded_nongrowing;
    }
    return v;
}

} // namespace lfcsim
