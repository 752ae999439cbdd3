#pragma once

#include <cstdint>
#include <cmath>

namespace stf {

// Counter-based stream: each (master seed, stream index) pair yields an
// independent reproducible sequence, so per-sample results do not depend on
// how samples are distributed over workers.
//
// The state update is the SplitMix64 counter (Weyl sequence + avalanche mix);
// substreams are keyed by mixing the stream index into the seed twice.
class Rng {
  public:
    Rng(std::uint64_t master_seed, std::uint64_t stream) {
        state_ = mix(master_seed ^ mix(stream + 0x9e3779b97f4a7c15ull));
        state_ = mix(state_ + stream);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in (0, 1]
    double uniform_pos() { return 1.0 - uniform(); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal, Box-Muller (no cached spare; keeps the stream a pure
    // function of the draw count)
    double normal() {
        double u = uniform_pos();
        double v = uniform();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586 * v);
    }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ull;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_;
};

}  // namespace stf
