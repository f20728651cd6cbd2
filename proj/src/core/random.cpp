#include "xrminfo/core/random.hpp"

#include <cmath>
#include <numbers>

namespace xrminfo {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t &hi, std::uint32_t &lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
    return (static_cast<double>(bits & ((1ull << 53) - 1)) + 0.5) * 0x1.0p-53;
}

} // namespace

std::array<std::uint32_t, 4> CounterRng::block(std::uint64_t index, std::uint32_t stream,
                                               std::uint32_t round) const noexcept {
    std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(index),
                                     static_cast<std::uint32_t>(index >> 32), stream, round};
    std::uint32_t k0 = static_cast<std::uint32_t>(seed_);
    std::uint32_t k1 = static_cast<std::uint32_t>(seed_ >> 32);
    for (int r = 0; r < 10; ++r) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return ctr;
}

double CounterRng::uniform(std::uint64_t index, std::uint32_t stream, std::uint32_t round) const noexcept {
    const auto b = block(index, stream, round);
    return to_open_unit(b[0], b[1]);
}

std::array<double, 2> CounterRng::uniform_pair(std::uint64_t index, std::uint32_t stream,
                                               std::uint32_t round) const noexcept {
    const auto b = block(index, stream, round);
    return {to_open_unit(b[0], b[1]), to_open_unit(b[2], b[3])};
}

double CounterRng::normal(std::uint64_t index, std::uint32_t stream, std::uint32_t round) const noexcept {
    const auto [u1, u2] = uniform_pair(index, stream, round);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace xrminfo
