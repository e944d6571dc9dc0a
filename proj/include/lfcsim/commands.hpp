#pragma once

// Batch commands behind the lfcsim executable. Each returns the process
// exit status: 0 success (run: stable), 2 run unstable, 1 error.

#include "lfcsim/cosim.hpp"
#include "lfcsim/sweep.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace lfcsim {

inline constexpr const char* kToolVersion = "lfcsim 0.1.0";

inline constexpr int kExitStable = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUnstable = 2;

int cmd_validate(const std::filesystem::path& config, std::ostream& out, std::ostream& err);

int cmd_run(const std::filesystem::path& config, const std::filesystem::path& out_dir, bool full_rate,
    std::ostream& out, std::ostream& err);

struct SweepRequest {
    std::filesystem::path config;
    std::filesystem::path out_dir;
    std::optional<std::vector<double>> kp;     ///< falls back to the config's [sweep] grids
    std::optional<std::vector<double>> ki;
    std::optional<std::vector<double>> delay;
    unsigned jobs = 1;
};

int cmd_sweep(const SweepRequest& request, std::ostream& out, std::ostream& err);

// File writers, exposed for tests.
void write_timeseries_csv(std::ostream& os, const RunRecord& record);
void write_sweep_csv(std::ostream& os, const std::vector<FeasibleSet>& rows);
void write_surfaces_csv(std::ostream& os, const std::vector<FeasibleSet>& rows);
void write_verdict(std::ostream& os, const StabilityVerdict& verdict, const RunRecord& record,
    const DetectorConfig& detector);

} // namespace lfcsim
