#include "netrate/codec.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <unordered_map>

namespace netrate {

Codebook::Codebook(std::map<std::int64_t, std::string> codes) : codes_(std::move(codes)) {
    if (codes_.empty()) throw std::invalid_argument("empty codebook");
    for (const auto& [s, c] : codes_)
        if (c.empty() || c.find_first_not_of("01") != std::string::npos)
            throw std::invalid_argument("codeword must be a nonempty bit string");
}

const std::string& Codebook::code(std::int64_t s) const {
    auto it = codes_.find(s);
    if (it == codes_.end()) throw std::out_of_range("symbol not in codebook");
    return it->second;
}

int Codebook::cost(std::int64_t s) const {
    auto it = codes_.find(s);
    if (it != codes_.end()) return static_cast<int>(it->second.size());
    if (!has_escape()) throw std::out_of_range("symbol not in codebook and no escape");
    return static_cast<int>(code(kEscape).size()) + kRawBits;
}

double Codebook::kraft_sum() const {
    double k = 0;
    for (const auto& [s, c] : codes_) k += std::ldexp(1.0, -static_cast<int>(c.size()));
    return k;
}

double Codebook::expected_length(const std::map<std::int64_t, std::uint64_t>& freq) const {
    double n = 0, bits = 0;
    for (const auto& [s, f] : freq) {
        n += static_cast<double>(f);
        bits += static_cast<double>(f) * cost(s);
    }
    if (n == 0) throw std::invalid_argument("empty frequency table");
    return bits / n;
}

std::string Codebook::serialize() const {
    std::string out;
    for (const auto& [s, c] : codes_)
        out += (s == kEscape ? std::string("esc") : std::to_string(s)) + "," + std::to_string(c.size()) + "," + c +
               "\n";
    return out;
}

Codebook Codebook::parse(const std::string& text) {
    std::map<std::int64_t, std::string> codes;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto a = line.find(','), b = line.find(',', a + 1);
        if (a == std::string::npos || b == std::string::npos) throw std::invalid_argument("bad codebook line");
        const std::string sym = line.substr(0, a), code = line.substr(b + 1);
        if (std::stoul(line.substr(a + 1, b - a - 1)) != code.size())
            throw std::invalid_argument("codeword length mismatch");
        codes[sym == "esc" ? kEscape : std::stoll(sym)] = code;
    }
    return Codebook(std::move(codes));
}

namespace {

// canonical codes from lengths, (length, symbol) order
std::map<std::int64_t, std::string> canonical(std::vector<std::pair<int, std::int64_t>> ls) {
    std::sort(ls.begin(), ls.end());
    std::map<std::int64_t, std::string> out;
    std::string code;
    for (const auto& [len, sym] : ls) {
        if (code.empty()) {
            code.assign(len, '0');
        } else {
            int i = static_cast<int>(code.size()) - 1;
            while (i >= 0 && code[i] == '1') code[i--] = '0';
            code[i] = '1';
            code.append(len - code.size(), '0');
        }
        out[sym] = code;
    }
    return out;
}

}  // namespace

Codebook huffman_build(const std::map<std::int64_t, std::uint64_t>& freq, bool with_escape) {
    std::vector<std::pair<std::int64_t, std::uint64_t>> leaves;
    for (const auto& [s, f] : freq)
        if (f > 0) leaves.emplace_back(s, f);
    if (leaves.empty()) throw std::invalid_argument("huffman_build needs a positive count");
    if (with_escape && !freq.count(Codebook::kEscape)) leaves.emplace_back(Codebook::kEscape, 0);

    const int n = static_cast<int>(leaves.size());
    if (n == 1) return Codebook({{leaves[0].first, "0"}});

    struct Node {
        std::uint64_t w;
        int rank;  // smallest leaf rank below
        int id;
    };
    auto later = [](const Node& a, const Node& b) { return a.w != b.w ? a.w > b.w : a.rank > b.rank; };
    std::priority_queue<Node, std::vector<Node>, decltype(later)> pq(later);
    std::vector<int> parent(2 * n - 1, -1);
    for (int i = 0; i < n; ++i) pq.push({leaves[i].second, i, i});
    int next = n;
    while (pq.size() > 1) {
        const Node a = pq.top();
        pq.pop();
        const Node b = pq.top();
        pq.pop();
        parent[a.id] = parent[b.id] = next;
        pq.push({a.w + b.w, std::min(a.rank, b.rank), next++});
    }
    std::vector<std::pair<int, std::int64_t>> lengths;
    for (int i = 0; i < n; ++i) {
        int d = 0;
        for (int p = parent[i]; p >= 0; p = parent[p]) ++d;
        lengths.emplace_back(d, leaves[i].first);
    }
    return Codebook(canonical(std::move(lengths)));
}

std::map<std::int64_t, std::uint64_t> frequencies(const std::vector<std::int64_t>& stream) {
    std::map<std::int64_t, std::uint64_t> f;
    for (std::int64_t s : stream) ++f[s];
    return f;
}

double empirical_entropy_bits(const std::map<std::int64_t, std::uint64_t>& freq) {
    double n = 0;
    for (const auto& [s, f] : freq) n += static_cast<double>(f);
    if (n == 0) return 0;
    double H = 0;
    for (const auto& [s, f] : freq)
        if (f > 0) {
            const double p = static_cast<double>(f) / n;
            H -= p * std::log2(p);
        }
    return H;
}

namespace {

class BitWriter {
public:
    void put(bool b) {
        if (nbits_ % 8 == 0) bytes_.push_back(0);
        if (b) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (nbits_ % 8));
        ++nbits_;
    }
    void put(const std::string& code) {
        for (char c : code) put(c == '1');
    }
    void put_raw(std::uint64_t v, int bits) {
        for (int i = bits - 1; i >= 0; --i) put((v >> i) & 1u);
    }
    std::uint64_t bits() const { return nbits_; }
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }

private:
    std::vector<std::uint8_t> bytes_;
    std::uint64_t nbits_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_stream(const std::vector<std::int64_t>& symbols, const Codebook& book) {
    if (symbols.size() > UINT32_MAX) throw std::length_error("stream too long for a 32-bit count");
    BitWriter w;
    for (std::int64_t s : symbols) {
        if (book.contains(s)) {
            w.put(book.code(s));
        } else {
            w.put(book.code(Codebook::kEscape));
            w.put_raw(static_cast<std::uint32_t>(static_cast<std::int32_t>(s)), Codebook::kRawBits);
        }
    }
    std::vector<std::uint8_t> out;
    const auto n = static_cast<std::uint32_t>(symbols.size());
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(n >> (8 * i)));
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(w.bits() >> (8 * i)));
    out.insert(out.end(), w.bytes().begin(), w.bytes().end());
    return out;
}

std::vector<std::int64_t> decode_stream(const std::vector<std::uint8_t>& bytes, const Codebook& book) {
    if (bytes.size() < 12) throw std::invalid_argument("truncated bitstream header");
    std::uint32_t n = 0;
    std::uint64_t nbits = 0;
    for (int i = 0; i < 4; ++i) n = (n << 8) | bytes[i];
    for (int i = 4; i < 12; ++i) nbits = (nbits << 8) | bytes[i];
    if ((nbits + 7) / 8 != bytes.size() - 12) throw std::invalid_argument("bit count disagrees with payload size");
    std::unordered_map<std::string, std::int64_t> lookup;
    for (const auto& [s, c] : book.codes()) lookup[c] = s;
    std::uint64_t pos = 0;
    auto bit = [&]() {
        if (pos >= nbits) throw std::invalid_argument("bitstream ends inside a codeword");
        const bool b = (bytes[12 + pos / 8] >> (7 - pos % 8)) & 1u;
        ++pos;
        return b;
    };
    std::vector<std::int64_t> out;
    out.reserve(n);
    std::string cur;
    while (out.size() < n) {
        cur += bit() ? '1' : '0';
        auto it = lookup.find(cur);
        if (it == lookup.end()) continue;
        cur.clear();
        if (it->second != Codebook::kEscape) {
            out.push_back(it->second);
            continue;
        }
        std::uint32_t raw = 0;
        for (int i = 0; i < Codebook::kRawBits; ++i) raw = (raw << 1) | (bit() ? 1u : 0u);
        out.push_back(static_cast<std::int32_t>(raw));
    }
    if (pos != nbits) throw std::invalid_argument("trailing bits after the last symbol");
    return out;
}

RateReport rate_and_entropy(const std::vector<std::int64_t>& stream, const Codebook& book) {
    if (stream.empty()) throw std::invalid_argument("empty symbol stream");
    RateReport r;
    const auto f = frequencies(stream);
    r.sample_count = stream.size();
    r.avg_len_bits = book.expected_length(f);
    r.empirical_entropy_bits = empirical_entropy_bits(f);
    return r;
}

RateReport two_pass_rate(const std::vector<std::int64_t>& stream) {
    if (stream.empty()) throw std::invalid_argument("empty symbol stream");
    return rate_and_entropy(stream, huffman_build(frequencies(stream), true));
}

}  // namespace netrate
