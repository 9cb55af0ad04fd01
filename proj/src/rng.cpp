#include "frbm/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace frbm {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(std::array<std::uint32_t, 4>& c, const std::array<std::uint32_t, 2>& k) {
    std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) {
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        round_once(counter, key);
    }
    return counter;
}

std::array<std::uint32_t, 4> RngStream::block(std::uint32_t block_index) const {
    std::array<std::uint32_t, 4> counter = {
        block_index,
        static_cast<std::uint32_t>(step_),
        static_cast<std::uint32_t>(step_ >> 32),
        stream_,
    };
    std::array<std::uint32_t, 2> key = {
        static_cast<std::uint32_t>(seed_),
        static_cast<std::uint32_t>(seed_ >> 32),
    };
    return philox4x32(counter, key);
}

double RngStream::uniform() {
    std::uint32_t block_index = draw_ / 2;
    std::uint32_t lane = draw_ % 2;
    ++draw_;
    std::array<std::uint32_t, 4> out = block(block_index);
    std::uint64_t hi = out[lane * 2];
    std::uint64_t lo = out[lane * 2 + 1];
    std::uint64_t bits = (hi << 32) | lo;
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

double RngStream::gaussian() {
    double u1 = uniform();
    double u2 = uniform();
    // 1 - u1 lies in (0, 1], so the log is finite.
    double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    return r * std::cos(2.0 * M_PI * u2);
}

std::uint64_t RngStream::uniform_u64() {
    std::uint32_t block_index = draw_ / 2;
    std::uint32_t lane = draw_ % 2;
    ++draw_;
    std::array<std::uint32_t, 4> out = block(block_index);
    return (static_cast<std::uint64_t>(out[lane * 2]) << 32) | out[lane * 2 + 1];
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    return uniform_u64() % n;
}

}  // namespace frbm
