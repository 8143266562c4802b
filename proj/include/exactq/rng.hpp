// rng.hpp: Seeded generator used for jittered reservoir grids
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. Doubles are formed from the top 53 bits, so a seed reproduces the
// same grid on every conforming toolchain (std::uniform_real_distribution is
// implementation-defined and is not used).

#pragma once

#include <cstdint>
#include <random>

namespace exactq {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace exactq
