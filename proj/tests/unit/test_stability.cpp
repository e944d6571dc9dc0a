#include "lfcsim/errors.hpp"
#include "lfcsim/stability.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

using namespace lfcsim;

namespace {

struct Series {
    std::vector<double> t;
    std::vector<double> f;
};

Series sample(double horizon, double dt, const std::function<double(double)>& fn)
{
    Series s;
    const auto n = static_cast<std::size_t>(std::llround(horizon / dt));
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) * dt;
        s.t.push_back(t);
        s.f.push_back(fn(t));
    }
    return s;
}

} // namespace

TEST_CASE("decaying oscillation is stable and settled")
{
    const auto s = sample(120.0, 0.1, [](double t) { return 60.0 + 0.5 * std::exp(-t / 10.0) * std::sin(t); });
    const auto v = detect_instability(s.t, s.f, false, {});
    CHECK(v.verdict == Verdict::stable);
    CHECK(v.reason == VerdictReason::settled);
    CHECK(v.peak_abs_df_hz > 0.4);
    CHECK(v.peak_abs_df_hz < 0.5);
}

TEST_CASE("growing oscillation is unstable")
{
    // 0.01 e^(t/20) reaches about 4 Hz at 120 s, so the bound trips as well;
    // growth takes precedence in the reported reason.
    const auto s = sample(120.0, 0.1, [](double t) { return 60.0 + 0.01 * std::exp(t / 20.0) * std::sin(t); });
    const auto v = detect_instability(s.t, s.f, false, {});
    CHECK(v.verdict == Verdict::unstable);
    CHECK(v.reason == VerdictReason::growing_envelope);
    CHECK(v.envelope_ratio == doctest::Approx(std::exp(1.0)).epsilon(0.05));

    DetectorConfig loose;
    loose.hard_bound_hz = 10.0;
    CHECK(detect_instability(s.t, s.f, false, loose).reason == VerdictReason::growing_envelope);
}

TEST_CASE("a single sample beyond the bound is unstable")
{
    auto s = sample(120.0, 0.1, [](double) { return 60.0; });
    s.f[100] = 64.0;
    const auto v = detect_instability(s.t, s.f, false, {});
    CHECK(v.verdict == Verdict::unstable);
    CHECK(v.reason == VerdictReason::bound_exceeded);
    CHECK(v.peak_abs_df_hz == doctest::Approx(4.0));
}

TEST_CASE("sustained small oscillation is bounded and not growing")
{
    const auto s = sample(120.0, 0.1, [](double t) { return 60.0 + 0.05 * std::sin(t); });
    const auto v = detect_instability(s.t, s.f, false, {});
    CHECK(v.verdict == Verdict::stable);
    CHECK(v.reason == VerdictReason::bounded_nongrowing);
}

TEST_CASE("growth below the amplitude floor is ignored")
{
    const auto s = sample(120.0, 0.1, [](double t) { return 60.0 + 1e-5 * std::exp(t / 20.0) * std::sin(t); });
    CHECK(detect_instability(s.t, s.f, false, {}).stable());
}

TEST_CASE("diverged runs are unstable whatever the samples")
{
    const auto s = sample(10.0, 0.1, [](double) { return 60.0; });
    const auto v = detect_instability(s.t, s.f, true, {});
    CHECK(v.verdict == Verdict::unstable);
    CHECK(v.reason == VerdictReason::diverged);
}

TEST_CASE("series shorter than two windows is rejected")
{
    const auto s = sample(39.0, 0.1, [](double) { return 60.0; });
    CHECK_THROWS_AS(detect_instability(s.t, s.f, false, {}), InvalidArgument);
}

TEST_CASE("verdicts are deterministic")
{
    const auto s = sample(120.0, 0.1, [](double t) { return 60.0 + 0.2 * std::sin(0.7 * t) * std::cos(0.05 * t); });
    CHECK(detect_instability(s.t, s.f, false, {}) == detect_instability(s.t, s.f, false, {}));
}
