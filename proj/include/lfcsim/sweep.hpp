#pragma once

// Feasible delay sets per (Kp, Ki) and the three-dimensional sweep.

#include "lfcsim/cosim.hpp"
#include "lfcsim/scenario.hpp"
#include "lfcsim/stability.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace lfcsim {

struct DelayInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool operator==(const DelayInterval&) const = default;
};

struct DelayPoint {
    double delay = 0.0;
    StabilityVerdict verdict;
    bool operator==(const DelayPoint&) const = default;
};

struct FeasibleSet {
    double kp = 0.0;
    double ki = 0.0;
    std::vector<DelayInterval> intervals;  ///< maximal runs of stable grid points
    std::vector<DelayPoint> points;        ///< per-delay verdicts, grid order
    double resolution = 0.0;               ///< smallest grid spacing

    std::optional<double> lower_margin() const;
    std::optional<double> upper_margin() const;
    bool operator==(const FeasibleSet&) const = default;
};

/// Position of a sweep cell; feeds the per-point seed derivation.
struct GridIndex {
    std::size_t kp = 0;
    std::size_t ki = 0;
};

/// Verdict of a finished run, using the scenario's detector settings.
StabilityVerdict classify_run(const Scenario& scenario, const RunRecord& record);

/// Merges consecutive stable points into closed intervals.
std::vector<DelayInterval> stable_intervals(std::span<const DelayPoint> points);

/// Seed used for the run at (kp index, ki index, delay index).
std::uint64_t point_seed(std::uint64_t base_seed, GridIndex cell, std::size_t delay_index);

/// Scenario run at one sweep point: gains and delay substituted, seed derived.
Scenario point_scenario(const Scenario& templ, double kp, double ki, double delay, std::uint64_t seed);

/// Runs the federation once per grid delay (full linear scan) and collects
/// the stable intervals. Run failures count as unstable(diverged).
FeasibleSet delay_feasible_set(const Scenario& templ, double kp, double ki, std::span<const double> delay_grid,
    GridIndex cell = {});

/// One FeasibleSet per (kp, ki), sorted by (kp, ki). Output does not depend
/// on `parallelism`.
std::vector<FeasibleSet> sweep_feasible_space(const Scenario& templ, std::span<const double> kp_grid,
    std::span<const double> ki_grid, std::span<const double> delay_grid, unsigned parallelism = 1);

/// Throws ConfigError when the template is unstable at zero delay on its
/// sweep target with its own gains.
void require_stable_baseline(const Scenario& templ);

} // namespace lfcsim
