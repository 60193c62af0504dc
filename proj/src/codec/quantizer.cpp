#include "netrate/codec.hpp"

#include <cmath>

namespace netrate {

Quantized quantize_uniform(double x, double delta) {
    if (!std::isfinite(x)) throw std::domain_error("quantizer input is not finite");
    if (!(delta > 0)) throw std::invalid_argument("quantizer step must be positive");
    // nearbyint honours the default round-to-nearest-even mode
    const double q = std::nearbyint(x / delta);
    if (std::abs(q) > static_cast<double>(kMaxIndex))
        throw QuantizerOverflow("quantization index outside the 32-bit alphabet");
    const auto i = static_cast<std::int64_t>(q);
    return {i, static_cast<double>(i) * delta};
}

std::int64_t ecdq_encode(double t, double d, double delta) { return quantize_uniform(t + d, delta).index; }

double ecdq_decode(std::int64_t index, double d, double delta) { return static_cast<double>(index) * delta - d; }

}  // namespace netrate
