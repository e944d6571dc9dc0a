#include "lfcsim/sweep.hpp"

#include "lfcsim/errors.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <thread>

namespace lfcsim {

std::optional<double> FeasibleSet::lower_margin() const
{
    if (intervals.empty())
        return std::nullopt;
    return intervals.front().lo;
}

std::optional<double> FeasibleSet::upper_margin() const
{
    if (intervals.empty())
        return std::nullopt;
    return intervals.back().hi;
}

StabilityVerdict classify_run(const Scenario& scenario, const RunRecord& record)
{
    const auto t = record.times();
    const auto f = record.frequencies();
    return detect_instability(t, f, record.diverged(), scenario.detector);
}

std::vector<DelayInterval> stable_intervals(std::span<const DelayPoint> points)
{
    std::vector<DelayInterval> out;
    bool open = false;
    for (const auto& p : points) {
        if (p.verdict.stable()) {
            if (open)
                out.back().hi = p.delay;
            else
                out.push_back({p.delay, p.delay});
            open = true;
        } else {
            open = false;
        }
    }
    return out;
}

std::uint64_t point_seed(std::uint64_t base_seed, GridIndex cell, std::size_t delay_index)
{
    return derive_seed(base_seed, {cell.kp, cell.ki, delay_index});
}

Scenario point_scenario(const Scenario& templ, double kp, double ki, double delay, std::uint64_t seed)
{
    Scenario s = with_delay(with_gains(templ, kp, ki), delay, templ.sweep.delay_target);
    s.seed = seed;
    return s;
}

namespace {

DelayPoint evaluate_point(const Scenario& templ, double kp, double ki, double delay, std::uint64_t seed)
{
    DelayPoint p;
    p.delay = delay;
    try {
        const Scenario s = point_scenario(templ, kp, ki, delay, seed);
        p.verdict = classify_run(s, run_federation(s));
    } catch (const Error&) {
        p.verdict.verdict = Verdict::unstable;
        p.verdict.reason = VerdictReason::diverged;
    }
    return p;
}

void check_grid(std::span<const double> delay_grid)
{
    if (delay_grid.empty())
        throw InvalidArgument("delay grid is empty");
    if (!std::is_sorted(delay_grid.begin(), delay_grid.end()) || delay_grid.front() < 0.0)
        throw InvalidArgument("delay grid must be sorted and non-negative");
}

double grid_resolution(std::span<const double> grid)
{
    double res = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double gap = grid[i] - grid[i - 1];
        res = (i == 1) ? gap : std::min(res, gap);
    }
    return res;
}

FeasibleSet assemble(double kp, double ki, std::vector<DelayPoint> points, std::span<const double> grid)
{
    FeasibleSet fs;
    fs.kp = kp;
    fs.ki = ki;
    fs.points = std::move(points);
    fs.intervals = stable_intervals(fs.points);
    fs.resolution = grid_resolution(grid);
    return fs;
}

} // namespace

FeasibleSet delay_feasible_set(const Scenario& templ, double kp, double ki, std::span<const double> delay_grid,
    GridIndex cell)
{
    check_grid(delay_grid);
    std::vector<DelayPoint> points;
    points.reserve(delay_grid.size());
    for (std::size_t d = 0; d < delay_grid.size(); ++d)
        points.push_back(evaluate_point(templ, kp, ki, delay_grid[d], point_seed(templ.seed, cell, d)));
    return assemble(kp, ki, std::move(points), delay_grid);
}

std::vector<FeasibleSet> sweep_feasible_space(const Scenario& templ, std::span<const double> kp_grid,
    std::span<const double> ki_grid, std::span<const double> delay_grid, unsigned parallelism)
{
    if (kp_grid.empty() || ki_grid.empty())
        throw InvalidArgument("sweep: gain grids must be non-empty");
    check_grid(delay_grid);

    const std::size_t nd = delay_grid.size();
    const std::size_t cells = kp_grid.size() * ki_grid.size();
    const std::size_t jobs = cells * nd;
    std::vector<DelayPoint> results(jobs);

    auto run_job = [&](std::size_t job) {
        const std::size_t d = job % nd;
        const std::size_t cell = job / nd;
        const GridIndex idx{cell / ki_grid.size(), cell % ki_grid.size()};
        results[job] = evaluate_point(templ, kp_grid[idx.kp], ki_grid[idx.ki], delay_grid[d],
            point_seed(templ.seed, idx, d));
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(parallelism, static_cast<unsigned>(jobs)));
    if (workers == 1) {
        for (std::size_t j = 0; j < jobs; ++j)
            run_job(j);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t j = next++; j < jobs; j = next++)
                    run_job(j);
            });
        }
    }

    std::vector<FeasibleSet> rows;
    rows.reserve(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        std::vector<DelayPoint> points(results.begin() + static_cast<std::ptrdiff_t>(c * nd),
            results.begin() + static_cast<std::ptrdiff_t>((c + 1) * nd));
        rows.push_back(assemble(kp_grid[c / ki_grid.size()], ki_grid[c % ki_grid.size()], std::move(points), delay_grid));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const FeasibleSet& a, const FeasibleSet& b) {
        return a.kp != b.kp ? a.kp < b.kp : a.ki < b.ki;
    });
    return rows;
}

void require_stable_baseline(const Scenario& templ)
{
    const Scenario s = with_delay(templ, 0.0, templ.sweep.delay_target);
    const auto verdict = classify_run(s, run_federation(s));
    if (!verdict.stable())
        throw ConfigError("[agc]", std::string("scenario is unstable at zero delay (") + to_string(verdict.reason)
                + "); the sweep is ill-posed");
}

} // namespace lfcsim
