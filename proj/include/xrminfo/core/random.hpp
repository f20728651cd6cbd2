#pragma once

#include <array>
#include <cstdint>

namespace xrminfo {

/// Counter-based generator (Philox4x32-10). Every draw is a pure function of
/// (seed, index, stream), so per-pixel sampling gives the same result in any
/// evaluation order and on any platform.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::array<std::uint32_t, 4> block(std::uint64_t index, std::uint32_t stream,
                                       std::uint32_t round = 0) const noexcept;

    /// Uniform on the open interval (0,1).
    double uniform(std::uint64_t index, std::uint32_t stream, std::uint32_t round = 0) const noexcept;

    /// A pair of uniforms on (0,1) from one Philox block.
    std::array<double, 2> uniform_pair(std::uint64_t index, std::uint32_t stream,
                                       std::uint32_t round = 0) const noexcept;

    /// Standard normal via Box-Muller on one block.
    double normal(std::uint64_t index, std::uint32_t stream, std::uint32_t round = 0) const noexcept;

private:
    std::uint64_t seed_;
};

} // namespace xrminfo
