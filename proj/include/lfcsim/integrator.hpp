#pragma once

#include <concepts>
#include <type_traits>
#include <utility>

namespace lfcsim {

/// Returns x + h * k. Overloaded per state type.
inline double add_scaled(double x, double h, double k) { return x + h * k; }

template <typename State, typename Rate>
concept Steppable = requires(const State& x, double h, const Rate& k) {
    { add_scaled(x, h, k) } -> std::convertible_to<State>;
};

/// One classical fourth-order Runge-Kutta step of size dt.
///
/// `rate(x)` returns dx/dt; `combine(x, dt, k1, k2, k3, k4)` forms the final
/// weighted update so state types can fuse the four slopes in one pass.
template <typename State, typename RateFn, typename CombineFn>
State rk4_advance(const State& x, double dt, RateFn&& rate, CombineFn&& combine)
{
    const auto k1 = rate(x);
    const auto k2 = rate(add_scaled(x, 0.5 * dt, k1));
    const auto k3 = rate(add_scaled(x, 0.5 * dt, k2));
    const auto k4 = rate(add_scaled(x, dt, k3));
    return combine(x, dt, k1, k2, k3, k4);
}

/// RK4 for any state with an add_scaled overload.
template <typename State, typename RateFn>
    requires Steppable<State, std::invoke_result_t<RateFn&, const State&>>
State rk4_advance(const State& x, double dt, RateFn&& rate)
{
    return rk4_advance(x, dt, std::forward<RateFn>(rate),
        [](const State& s, double h, const auto& k1, const auto& k2, const auto& k3, const auto& k4) {
            State out = add_scaled(s, h / 6.0, k1);
            out = add_scaled(out, h / 3.0, k2);
            out = add_scaled(out, h / 3.0, k3);
            return add_scaled(out, h / 6.0, k4);
        });
}

} // namespace lfcsim
