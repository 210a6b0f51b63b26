#ifndef UAVD2D_RNG_HPP
#define UAVD2D_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace uavd2d {

// FNV-1a, used to derive independent per-module RNG streams from one seed.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Deterministic random stream. Draws happen on a fixed schedule before any
// parallel region, so results do not depend on thread count.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // [0, 1)
    double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    std::mt19937_64 engine_;
};

inline RngStream derive_stream(std::uint64_t seed, std::string_view label) {
    std::uint64_t h = fnv1a(label);
    // splitmix-style mix keeps nearby seeds from producing correlated engines
    std::uint64_t s = seed + 0x9e3779b97f4a7c15ULL * (h | 1);
    s ^= s >> 30; s *= 0xbf58476d1ce4e5b9ULL;
    s ^= s >> 27; s *= 0x94d049bb133111ebULL;
    s ^= s >> 31;
    return RngStream(s);
}

}  // namespace uavd2d

#endif
