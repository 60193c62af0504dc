#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace netrate {

// Philox4x32-10 (Salmon et al.), counter-based.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;
    static Counter block(Counter ctr, Key key);
    static constexpr const char* name = "philox4x32-10";
};

// Stream of independent draws addressed by (index, lane); encoder and decoder
// holding the same seed see the same values.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint32_t stream = 0) : seed_(seed), stream_(stream) {}
    std::array<std::uint32_t, 4> raw(std::uint64_t index, std::uint32_t lane = 0) const;
    double uniform(std::uint64_t index, std::uint32_t lane = 0) const;  // (0, 1)
    double normal(std::uint64_t index, std::uint32_t lane = 0) const;   // Box-Muller
    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint32_t stream_;
};

class Dither {
public:
    Dither(std::uint64_t seed, double delta);
    double at(std::uint64_t k) const;  // uniform on (-delta/2, delta/2)
    double delta() const { return delta_; }
    std::uint64_t seed() const { return rng_.seed(); }

private:
    CounterRng rng_;
    double delta_;
};

struct Quantized {
    std::int64_t index;
    double value;
};

inline constexpr std::int64_t kMaxIndex = (std::int64_t{1} << 31) - 1;

struct QuantizerOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Quantized quantize_uniform(double x, double delta);
std::int64_t ecdq_encode(double t, double d, double delta);
double ecdq_decode(std::int64_t index, double d, double delta);

class Codebook {
public:
    static constexpr std::int64_t kEscape = INT64_MAX;
    static constexpr int kRawBits = 32;

    Codebook() = default;
    explicit Codebook(std::map<std::int64_t, std::string> codes);

    bool contains(std::int64_t s) const { return codes_.count(s) > 0; }
    bool has_escape() const { return contains(kEscape); }
    const std::string& code(std::int64_t s) const;
    // bits charged for a symbol, escape payload included
    int cost(std::int64_t s) const;
    double kraft_sum() const;
    double expected_length(const std::map<std::int64_t, std::uint64_t>& freq) const;
    const std::map<std::int64_t, std::string>& codes() const { return codes_; }
    std::string serialize() const;  // "symbol,length,code" lines sorted by symbol
    static Codebook parse(const std::string& text);

private:
    std::map<std::int64_t, std::string> codes_;
};

Codebook huffman_build(const std::map<std::int64_t, std::uint64_t>& freq, bool with_escape = false);

std::map<std::int64_t, std::uint64_t> frequencies(const std::vector<std::int64_t>& stream);
double empirical_entropy_bits(const std::map<std::int64_t, std::uint64_t>& freq);

// u32 symbol count, u64 bit count (both big-endian), then codewords packed
// MSB first; unseen symbols go out as escape + 32-bit two's complement index.
std::vector<std::uint8_t> encode_stream(const std::vector<std::int64_t>& symbols, const Codebook& book);
std::vector<std::int64_t> decode_stream(const std::vector<std::uint8_t>& bytes, const Codebook& book);

struct RateReport {
    double avg_len_bits = 0;
    double empirical_entropy_bits = 0;
    std::uint64_t sample_count = 0;
    double var_z_hat = 0;
    double ci_halfwidth = 0;
};

RateReport rate_and_entropy(const std::vector<std::int64_t>& stream, const Codebook& book);
// pass 1 trains the code (with escape), pass 2 charges the stream
RateReport two_pass_rate(const std::vector<std::int64_t>& stream);

}  // namespace netrate
