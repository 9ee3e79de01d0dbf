#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace parametrix {

// Philox4x32-10 (Salmon et al., SC'11). Stateless: every output block is a
// pure function of (key, counter), so a draw is addressed by its
// coordinates instead of by its position in a stream.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;

    explicit Philox4x32(std::uint64_t seed)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    Block operator()(Block ctr) const {
        std::array<std::uint32_t, 2> k = key_;
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                k[0] += 0x9E3779B9u;
                k[1] += 0xBB67AE85u;
            }
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k[1], static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }

private:
    std::array<std::uint32_t, 2> key_;
};

// Uniforms in the open interval (0, 1) on the midpoints of a 2^-52 grid,
// so both ends stay exactly representable: 2^-53 and 1 - 2^-53.
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 12;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

struct UniformBlock {
    double u[2];
};

class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : gen_(seed) {}

    // Two uniforms for the given coordinates.
    UniformBlock uniforms(std::uint64_t path, std::uint32_t step, std::uint32_t slot) const {
        const auto b = gen_({static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32), step, slot});
        return {{to_unit(b[0], b[1]), to_unit(b[2], b[3])}};
    }

    // One standard normal from the uniform pair at this address (Box-Muller,
    // cosine branch).
    double normal(std::uint64_t path, std::uint32_t step, std::uint32_t slot) const {
        const auto u = uniforms(path, step, slot);
        return std::sqrt(-2.0 * std::log(u.u[0])) * std::cos(6.283185307179586 * u.u[1]);
    }

private:
    Philox4x32 gen_;
};

}  // namespace parametrix
