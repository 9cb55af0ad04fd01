#pragma once

#include <array>
#include <cstdint>

namespace frbm {

/// One Philox4x32-10 block: 128-bit counter plus 64-bit key in, four 32-bit
/// words out. Pure function; every random draw in the library is derived from
/// it, which makes results independent of thread schedule and replayable from
/// (seed, stream, step, draw) coordinates alone.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Non-overlapping stream-id bases. Each subsystem derives its stream ids by
/// adding a small index to its base, so one user-facing seed never feeds the
/// same counter block to two different consumers.
inline constexpr std::uint32_t kStreamChainBase = 0u;          // sampling chains
inline constexpr std::uint32_t kStreamAisBase = 1u << 27;      // one stream per run
inline constexpr std::uint32_t kStreamSplitBase = 1u << 28;    // dataset shuffles
inline constexpr std::uint32_t kStreamCdBase = 1u << 29;       // trainer init + shuffles
inline constexpr std::uint32_t kStreamFwBase = 1u << 30;       // inner-solver init noise

/// Counter-based random stream. The key is the 64-bit seed; the 128-bit block
/// counter is (draw_block, step_lo, step_hi, stream). `step` is advanced by
/// the caller at known points (one sampler step, one schedule index), and the
/// draw counter enumerates values inside a step, so the n-th draw of a given
/// step is a fixed function of (seed, stream, step, n).
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint32_t stream, std::uint64_t step = 0)
        : seed_(seed), stream_(stream), step_(step) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();

    /// Standard normal via Box-Muller; always consumes exactly two uniforms.
    double gaussian();

    /// All 64 bits of one block, for index draws.
    std::uint64_t uniform_u64();

    /// Uniform integer in [0, n); n >= 1.
    std::uint64_t uniform_index(std::uint64_t n);

    /// Moves to a new step and resets the draw counter.
    void set_step(std::uint64_t step) {
        step_ = step;
        draw_ = 0;
    }
    void next_step() { set_step(step_ + 1); }

    std::uint64_t step() const { return step_; }
    std::uint32_t draw_index() const { return draw_; }
    std::uint32_t stream() const { return stream_; }

private:
    std::array<std::uint32_t, 4> block(std::uint32_t block_index) const;

    std::uint64_t seed_;
    std::uint32_t stream_;
    std::uint64_t step_;
    std::uint32_t draw_ = 0;
};

}  // namespace frbm
