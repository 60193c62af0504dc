#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace netrate {

struct ProtocolError : std::logic_error {
    using std::logic_error::logic_error;
};

struct DelaySpec {
    enum class Mode { constant, random };
    Mode mode = Mode::constant;
    int h = 0;
    std::vector<std::pair<int, double>> support;  // (h_j, alpha_j), h_j increasing
    std::uint64_t seed = 0;

    static DelaySpec constant(int h);
    static DelaySpec random(std::vector<std::pair<int, double>> support, std::uint64_t seed);

    void validate() const;
    int h_max() const;
    // delay of the word emitted at k; pure in (seed, k)
    int delay_at(std::uint64_t k) const;
};

std::vector<int> sample_delays(const DelaySpec& spec, std::size_t n);

struct Word {
    std::uint64_t emit = 0;
    std::int64_t index = 0;
    int bits = 0;
    double value = 0;  // analog payload for the Gaussian surrogate channel
};

struct ArrivalSet {
    std::uint64_t k = 0;
    std::vector<Word> members;  // ascending emit index
};

class Channel {
public:
    virtual ~Channel() = default;
    // delay the word emitted at k will see; known to the encoder on emission
    virtual int delay_of(std::uint64_t k) const = 0;
    virtual void transmit(std::uint64_t k, const Word& w) = 0;
    virtual ArrivalSet deliver(std::uint64_t k) = 0;
    virtual std::size_t in_flight() const = 0;
};

class DelayChannel : public Channel {
public:
    explicit DelayChannel(DelaySpec spec);
    int delay_of(std::uint64_t k) const override { return spec_.delay_at(k); }
    void transmit(std::uint64_t k, const Word& w) override;
    ArrivalSet deliver(std::uint64_t k) override;
    std::size_t in_flight() const override;
    const DelaySpec& spec() const { return spec_; }

private:
    DelaySpec spec_;
    std::uint64_t next_transmit_ = 0, next_deliver_ = 0;
    std::map<std::uint64_t, std::vector<Word>> pending_;  // by arrival time
};

// Holds arrivals and releases word k - h_max at time k.
class ReorderBuffer {
public:
    explicit ReorderBuffer(int h_max);
    void push(const ArrivalSet& a);
    std::optional<Word> pop(std::uint64_t k);  // empty for k < h_max
    int h_max() const { return h_max_; }

private:
    int h_max_;
    std::map<std::uint64_t, Word> held_;
};

std::vector<std::optional<Word>> buffered_reorder(const std::vector<ArrivalSet>& arrivals, int h_max);

struct ChannelTraceRow {
    std::uint64_t k;
    int bits;
    int h;
    std::vector<std::uint64_t> delivered;
};
void write_channel_trace(std::ostream& os, const std::vector<ChannelTraceRow>& rows);

}  // namespace netrate
