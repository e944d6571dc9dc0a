#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace lfcsim {

/// splitmix64 finalizer; used to derive independent seeds.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed for a child stream identified by `path` under `base`.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path)
{
    std::uint64_t s = mix64(base);
    for (auto p : path)
        s = mix64(s ^ mix64(p + 0x632be59bd9b4e019ULL));
    return s;
}

/// Uniform doubles in [0, 1) from mt19937_64. The engine's output sequence
/// is fixed by the standard, and the conversion below is fixed here, so
/// draws are identical across platforms.
class UniformStream {
public:
    explicit UniformStream(std::uint64_t seed)
        : engine_(seed)
    {
    }

    double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next(); }

private:
    std::mt19937_64 engine_;
};

} // namespace lfcsim
