#pragma once

#include <cstdint>

// Counter-derived per-path random streams. Each path seeds its own
// generator from (master, index), so an ensemble gives the same numbers
// under any execution order or thread count.

namespace qpwalk {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

// splitmix64 output scrambler
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t path_index) {
    return mix64(master + (path_index + 1) * kGoldenGamma);
}

class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += kGoldenGamma;
        return mix64(state_);
    }

    // uniform on [0, 1) with 53 random bits
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  private:
    std::uint64_t state_;
};

}  // namespace qpwalk
