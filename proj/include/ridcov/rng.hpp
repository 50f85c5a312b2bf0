#pragma once

// Splittable counter-style RNG.  A stream is identified by (seed, stream_id);
// the same pair always reproduces the same sequence, and substream(i) derives
// an independent child stream, so per-trial streams can be constructed
// directly from (seed, trial_index) and parallel runs match serial ones.
//
// The generator is the SplitMix64 construction: a 64-bit counter advanced by
// a fixed odd increment and passed through a finalizing mixer.  Cheap to
// construct (two multiplies), which matters when every Monte Carlo trial gets
// its own stream.

#include <cstdint>

namespace ridcov {

class RngStream {
public:
    RngStream() : RngStream(0, 0) {}

    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_id_(stream_id),
          state_(mix64(mix64(seed + kGamma) ^ mix64(stream_id + kStreamSalt)))
    {
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64()
    {
        state_ += kGamma;
        return mix64(state_);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Unbiased integer in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n)
    {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold)
                return r % n;
        }
    }

    // Child stream independent of this stream and of other indices.
    RngStream substream(std::uint64_t index) const
    {
        return RngStream(seed_, mix64(stream_id_ + kStreamSalt) + index);
    }

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
    static constexpr std::uint64_t kStreamSalt = 0xD1B54A32D192ED03ull;

    static std::uint64_t mix64(std::uint64_t z)
    {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t state_;
};

} // namespace ridcov
