#include "netrate/codec.hpp"

#include <cmath>
#include <numbers>

namespace netrate {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter c, Key k) {
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            k[0] += kW0;
            k[1] += kW1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kM0, c[0], hi0, lo0);
        mulhilo(kM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

std::array<std::uint32_t, 4> CounterRng::raw(std::uint64_t index, std::uint32_t lane) const {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), lane,
                                  stream_};
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
    return Philox4x32::block(ctr, key);
}

namespace {

inline double to_open_unit(std::uint32_t a, std::uint32_t b) {
    const std::uint64_t m = ((static_cast<std::uint64_t>(b) << 32) | a) >> 11;
    return (static_cast<double>(m) + 0.5) * 0x1p-53;
}

}  // namespace

double CounterRng::uniform(std::uint64_t index, std::uint32_t lane) const {
    const auto r = raw(index, lane);
    return to_open_unit(r[0], r[1]);
}

double CounterRng::normal(std::uint64_t index, std::uint32_t lane) const {
    const auto r = raw(index, lane);
    const double u1 = to_open_unit(r[0], r[1]), u2 = to_open_unit(r[2], r[3]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Dither::Dither(std::uint64_t seed, double delta) : rng_(seed, 0x64697468u), delta_(delta) {
    if (!(delta > 0) || !std::isfinite(delta)) throw std::invalid_argument("dither step must be positive");
}

double Dither::at(std::uint64_t k) const { return (rng_.uniform(k) - 0.5) * delta_; }

}  // namespace netrate
