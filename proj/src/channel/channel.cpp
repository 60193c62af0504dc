#include "netrate/channel.hpp"
#include "netrate/codec.hpp"

#include <algorithm>
#include <cmath>

namespace netrate {

DelaySpec DelaySpec::constant(int h) {
    DelaySpec s;
    s.mode = Mode::constant;
    s.h = h;
    s.validate();
    return s;
}

DelaySpec DelaySpec::random(std::vector<std::pair<int, double>> support, std::uint64_t seed) {
    DelaySpec s;
    s.mode = Mode::random;
    s.support = std::move(support);
    s.seed = seed;
    s.validate();
    return s;
}

void DelaySpec::validate() const {
    if (mode == Mode::constant) {
        if (h < 0) throw std::invalid_argument("negative delay");
        return;
    }
    if (support.empty()) throw std::invalid_argument("empty delay support");
    double sum = 0;
    for (size_t j = 0; j < support.size(); ++j) {
        if (support[j].first < 0) throw std::invalid_argument("negative delay in support");
        if (j > 0 && support[j].first <= support[j - 1].first)
            throw std::invalid_argument("delay support must be strictly increasing");
        if (!(support[j].second >= 0)) throw std::invalid_argument("negative delay probability");
        sum += support[j].second;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("delay probabilities must sum to one");
}

int DelaySpec::h_max() const { return mode == Mode::constant ? h : support.back().first; }

int DelaySpec::delay_at(std::uint64_t k) const {
    if (mode == Mode::constant) return h;
    const double u = CounterRng(seed, 0x64656c79u).uniform(k);
    double acc = 0;
    for (const auto& [hj, a] : support) {
        acc += a;
        if (u < acc) return hj;
    }
    return support.back().first;
}

std::vector<int> sample_delays(const DelaySpec& spec, std::size_t n) {
    std::vector<int> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = spec.delay_at(k);
    return out;
}

DelayChannel::DelayChannel(DelaySpec spec) : spec_(std::move(spec)) { spec_.validate(); }

void DelayChannel::transmit(std::uint64_t k, const Word& w) {
    if (k != next_transmit_) throw ProtocolError("transmit calls must come once per step, in order");
    Word word = w;
    word.emit = k;
    pending_[k + spec_.delay_at(k)].push_back(word);
    ++next_transmit_;
}

ArrivalSet DelayChannel::deliver(std::uint64_t k) {
    if (k != next_deliver_ || k >= next_transmit_) throw ProtocolError("deliver(k) must follow transmit(k), in order");
    ++next_deliver_;
    ArrivalSet a{k, {}};
    auto it = pending_.find(k);
    if (it != pending_.end()) {
        a.members = std::move(it->second);
        pending_.erase(it);
        std::sort(a.members.begin(), a.members.end(), [](const Word& x, const Word& y) { return x.emit < y.emit; });
    }
    return a;
}

std::size_t DelayChannel::in_flight() const {
    std::size_t n = 0;
    for (const auto& [t, v] : pending_) n += v.size();
    return n;
}

ReorderBuffer::ReorderBuffer(int h_max) : h_max_(h_max) {
    if (h_max < 0) throw std::invalid_argument("negative buffer depth");
}

void ReorderBuffer::push(const ArrivalSet& a) {
    for (const Word& w : a.members) {
        if (w.emit > a.k) throw ProtocolError("word delivered before its emission");
        held_[w.emit] = w;
    }
}

std::optional<Word> ReorderBuffer::pop(std::uint64_t k) {
    if (k < static_cast<std::uint64_t>(h_max_)) return std::nullopt;
    const std::uint64_t want = k - h_max_;
    auto it = held_.find(want);
    if (it == held_.end()) throw std::logic_error("word k - h_max has not arrived; delay exceeds h_max");
    Word w = it->second;
    held_.erase(it);
    return w;
}

std::vector<std::optional<Word>> buffered_reorder(const std::vector<ArrivalSet>& arrivals, int h_max) {
    ReorderBuffer buf(h_max);
    std::vector<std::optional<Word>> out;
    out.reserve(arrivals.size());
    for (const ArrivalSet& a : arrivals) {
        buf.push(a);
        out.push_back(buf.pop(a.k));
    }
    return out;
}

void write_channel_trace(std::ostream& os, const std::vector<ChannelTraceRow>& rows) {
    os << "k,emitted_word_len_bits,h,delivered_indices\n";
    for (const auto& r : rows) {
        os << r.k << ',' << r.bits << ',' << r.h << ',';
        for (size_t i = 0; i < r.delivered.size(); ++i) os << (i ? ";" : "") << r.delivered[i];
        os << '\n';
    }
}

}  // namespace netrate
