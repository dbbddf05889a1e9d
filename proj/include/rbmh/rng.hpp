#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace rbmh {

// SplitMix64 finalizer; used both for seed expansion and for deriving
// independent sub-stream seeds from (seed, label...) tuples.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t label) {
    return splitmix64(seed ^ splitmix64(label + 0x9e3779b97f4a7c15ULL));
}

/// Deterministic xoshiro256** stream. Streams for distinct seeds are
/// derived through SplitMix64 so that nearby seeds do not correlate.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) {
            sm = splitmix64(sm);
            word = sm;
        }
        // xoshiro must not start from the all-zero state
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[3] = 1;
    }

    /// Stream for a labelled sub-purpose of `seed` (path uniforms, proposal
    /// draws, ...). Distinct labels give statistically independent streams.
    static RngStream substream(std::uint64_t seed, std::uint64_t label) {
        return RngStream(mix_seed(seed, label));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// U[0,1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// U(0,1), never exactly 0 (safe under log).
    double uniform_pos() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; consumes exactly two uniforms.
    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

    double cauchy(double scale) {
        return scale * std::tan(std::numbers::pi * (uniform_pos() - 0.5));
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

// Sub-stream labels. Keeping path uniforms, proposal draws, weight draws and
// control-variate draws on separate streams means enabling the weight
// estimators never perturbs the underlying chain, so paired comparisons on
// identical paths are possible.
enum class StreamLabel : std::uint64_t {
    PathUniforms = 1,
    ProposalDraws = 2,
    WeightDraws = 3,
    ControlVariateDraws = 4,
    InitDraw = 5,
};

struct ChainRngs {
    RngStream path_uniforms;
    RngStream proposals;
    RngStream weights;
    RngStream control_variate;
    RngStream init;

    static ChainRngs from_seed(std::uint64_t seed) {
        auto sub = [seed](StreamLabel label) {
            return RngStream::substream(seed, static_cast<std::uint64_t>(label));
        };
        return ChainRngs{sub(StreamLabel::PathUniforms), sub(StreamLabel::ProposalDraws),
                         sub(StreamLabel::WeightDraws),  sub(StreamLabel::ControlVariateDraws),
                         sub(StreamLabel::InitDraw)};
    }
};

}  // namespace rbmh
