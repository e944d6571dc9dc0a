#pragma once

// Stable/unstable classification of a frequency trajectory.

#include <span>
#include <string>

namespace lfcsim {

struct DetectorConfig {
    double hard_bound_hz = 3.0;
    double window_s = 20.0;
    double growth_ratio = 1.05;
    double amplitude_floor_hz = 0.01;
    double settle_band_hz = 0.01;  ///< "settled" when the final |f - f0| is below this
    double f0_hz = 60.0;

    void validate() const;
    bool operator==(const DetectorConfig&) const = default;
};

enum class Verdict { stable, unstable };
enum class VerdictReason { bound_exceeded, growing_envelope, diverged, settled, bounded_nongrowing };

const char* to_string(Verdict v);
const char* to_string(VerdictReason r);

struct StabilityVerdict {
    Verdict verdict = Verdict::stable;
    VerdictReason reason = VerdictReason::settled;
    double peak_abs_df_hz = 0.0;
    double envelope_ratio = 0.0;  ///< peak-to-peak of the final window over the preceding one

    bool stable() const { return verdict == Verdict::stable; }
    bool operator==(const StabilityVerdict&) const = default;
};

/// Classifies a sampled frequency trajectory (Hz).
///
/// Unstable when the run diverged, when the final-window peak-to-peak
/// amplitude grew by more than growth_ratio over the preceding window while
/// above the amplitude floor, or when any sample leaves f0 +- hard_bound.
/// Throws InvalidArgument when a non-diverged series spans less than two
/// windows.
StabilityVerdict detect_instability(std::span<const double> t, std::span<const double> f_hz, bool diverged,
    const DetectorConfig& cfg);

} // namespace lfcsim
