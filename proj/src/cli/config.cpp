#include "netrate/cli.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace netrate {

namespace pt = boost::property_tree;

namespace {

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

double to_double(const std::string& s, const std::string& key) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(fmt::format("{}: '{}' is not a number", key, s));
    }
}

long long to_int(const std::string& s, const std::string& key) {
    try {
        size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(fmt::format("{}: '{}' is not an integer", key, s));
    }
}

std::uint64_t to_u64(const std::string& s, const std::string& key) {
    try {
        size_t pos = 0;
        if (!s.empty() && s[0] == '-') throw std::invalid_argument(s);
        const unsigned long long v = std::stoull(s, &pos, 0);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(fmt::format("{}: '{}' is not a nonnegative integer", key, s));
    }
}

std::vector<double> doubles(const std::string& s, const std::string& key) {
    std::vector<double> v;
    for (const auto& t : split(s)) v.push_back(to_double(t, key));
    if (v.empty()) throw ConfigError(key + ": empty list");
    return v;
}

std::string fmt_list(const std::vector<double>& v) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : " ") + fmt::format("{:.17g}", x);
    return s;
}

// Section view that tracks which keys were consumed.
class Section {
public:
    Section(const pt::ptree* t, std::string name) : t_(t), name_(std::move(name)) {}
    std::optional<std::string> get(const std::string& key) {
        if (!t_) return std::nullopt;
        auto v = t_->get_child_optional(pt::ptree::path_type(key, '\0'));
        if (!v) return std::nullopt;
        used_.insert(key);
        return v->data();
    }
    std::string require(const std::string& key) {
        auto v = get(key);
        if (!v) throw ConfigError(fmt::format("[{}] missing key '{}'", name_, key));
        return *v;
    }
    void check_unused() const {
        if (!t_) return;
        for (const auto& [k, v] : *t_)
            if (!used_.count(k)) throw ConfigError(fmt::format("[{}] unknown key '{}'", name_, k));
    }
    std::string key(const std::string& k) const { return "[" + name_ + "] " + k; }

private:
    const pt::ptree* t_;
    std::string name_;
    std::set<std::string> used_;
};

RationalTransfer read_tf(Section& s, const std::string& stem) {
    const auto num = doubles(s.require(stem + ".num"), s.key(stem + ".num"));
    const auto den = doubles(s.require(stem + ".den"), s.key(stem + ".den"));
    try {
        return RationalTransfer(num, den);
    } catch (const std::exception& e) {
        throw ConfigError(fmt::format("{}: {}", s.key(stem), e.what()));
    }
}

GeneralizedPlant read_plant(Section& s) {
    const int nz = static_cast<int>(to_int(s.get("nz").value_or("1"), s.key("nz")));
    const int nw = static_cast<int>(to_int(s.get("nw").value_or("1"), s.key("nw")));
    if (nz < 1 || nw < 1) throw ConfigError("[plant] nz and nw must be positive");
    GeneralizedPlant G;
    const bool scalar = nz == 1 && nw == 1;
    G.G11.assign(nz, std::vector<RationalTransfer>(nw));
    G.G12.resize(nz);
    G.G21.resize(nw);
    for (int i = 0; i < nz; ++i)
        for (int j = 0; j < nw; ++j) G.G11[i][j] = read_tf(s, scalar ? "G11" : fmt::format("G11.{}.{}", i, j));
    for (int i = 0; i < nz; ++i) G.G12[i] = read_tf(s, scalar ? "G12" : fmt::format("G12.{}", i));
    for (int j = 0; j < nw; ++j) G.G21[j] = read_tf(s, scalar ? "G21" : fmt::format("G21.{}", j));
    G.G22 = read_tf(s, "G22");
    return G;
}

void write_tf(std::ostream& os, const std::string& stem, const RationalTransfer& g) {
    os << stem << ".num = " << fmt_list(g.num()) << "\n" << stem << ".den = " << fmt_list(g.den()) << "\n";
}

bool same_tf(const RationalTransfer& a, const RationalTransfer& b) { return a.num() == b.num() && a.den() == b.den(); }

bool same_plant(const GeneralizedPlant& a, const GeneralizedPlant& b) {
    if (a.nz() != b.nz() || a.nw() != b.nw()) return false;
    for (int i = 0; i < a.nz(); ++i) {
        if (!same_tf(a.G12[i], b.G12[i])) return false;
        for (int j = 0; j < a.nw(); ++j)
            if (!same_tf(a.G11[i][j], b.G11[i][j])) return false;
    }
    for (int j = 0; j < a.nw(); ++j)
        if (!same_tf(a.G21[j], b.G21[j])) return false;
    return same_tf(a.G22, b.G22);
}

const char* noise_name(ChannelNoise n) {
    switch (n) {
        case ChannelNoise::ecdq: return "ecdq";
        case ChannelNoise::awgn: return "awgn";
        case ChannelNoise::ideal: return "ideal";
    }
    return "ecdq";
}

}  // namespace

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
    const PhiOptions &a = solver, &b = o.solver;
    return plant_file == o.plant_file && same_plant(plant, o.plant) && h == o.h && delay_mode == o.delay_mode &&
           support == o.support && grid == o.grid && horizon == o.horizon && burn_in == o.burn_in &&
           realizations == o.realizations && margin == o.margin && noise == o.noise &&
           seeds.noise == o.seeds.noise && seeds.dither == o.seeds.dither && seeds.delay == o.seeds.delay &&
           a.fir_order == b.fir_order && a.max_fir_order == b.max_fir_order && a.truncation_tol == b.truncation_tol &&
           a.bracket_tol == b.bracket_tol && a.max_decoder_iterations == b.max_decoder_iterations &&
           a.decoder_tol == b.decoder_tol && a.adapt_decoder == b.adapt_decoder && out_dir == o.out_dir;
}

GeneralizedPlant benchmark_plant() {
    const RationalTransfer g({0.0, 0.0, 0.165}, {1.0, -2.5789, 1.1578});
    return GeneralizedPlant::siso(g, g, g, g);
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    static const std::set<std::string> known{"plant", "delays", "grid", "sim", "seeds", "solver", "output"};
    for (const auto& [k, v] : tree)
        if (!known.count(k)) throw ConfigError(fmt::format("unknown section [{}]", k));
    auto section = [&](const std::string& name) {
        auto c = tree.get_child_optional(name);
        return Section(c ? &*c : nullptr, name);
    };

    ExperimentConfig cfg;

    Section plant = section("plant");
    if (auto f = plant.get("file")) {
        cfg.plant_file = *f;
        std::filesystem::path p = *f;
        if (p.is_relative()) p = base_dir / p;
        std::ifstream in(p);
        if (!in) throw ConfigError("cannot open plant file " + p.string());
        pt::ptree pf;
        try {
            pt::read_ini(in, pf);
        } catch (const pt::ini_parser_error& e) {
            throw ConfigError(std::string("malformed plant file: ") + e.what());
        }
        auto c = pf.get_child_optional("plant");
        if (!c) throw ConfigError("plant file has no [plant] section");
        Section ps(&*c, "plant");
        cfg.plant = read_plant(ps);
        ps.check_unused();
    } else {
        cfg.plant = read_plant(plant);
    }
    plant.check_unused();
    const auto rep = validate_assumption1(cfg.plant);
    if (!rep.ok())
        for (const auto& c : rep.items)
            if (!c.pass) throw ConfigError(fmt::format("plant fails '{}': {}", c.name, c.detail));

    Section del = section("delays");
    if (auto v = del.get("h")) {
        cfg.h.clear();
        for (const auto& t : split(*v)) {
            const long long h = to_int(t, del.key("h"));
            if (h < 0) throw ConfigError("[delays] h must be nonnegative");
            cfg.h.push_back(static_cast<int>(h));
        }
        if (cfg.h.empty()) throw ConfigError("[delays] h is empty");
    }
    const std::string mode = del.get("mode").value_or("constant");
    if (mode == "random") {
        cfg.delay_mode = DelaySpec::Mode::random;
        for (const auto& t : split(del.require("support"))) {
            const auto c = t.find(':');
            if (c == std::string::npos) throw ConfigError("[delays] support entries are h:probability");
            cfg.support.emplace_back(static_cast<int>(to_int(t.substr(0, c), del.key("support"))),
                                     to_double(t.substr(c + 1), del.key("support")));
        }
        try {
            DelaySpec::random(cfg.support, 0);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("[delays] support: ") + e.what());
        }
    } else if (mode != "constant") {
        throw ConfigError("[delays] mode must be constant or random");
    }
    del.check_unused();

    Section grid = section("grid");
    if (auto v = grid.get("D")) {
        cfg.grid.values = doubles(*v, grid.key("D"));
    } else {
        const std::string mn = grid.get("D_min").value_or("auto");
        cfg.grid.auto_min = mn == "auto";
        if (!cfg.grid.auto_min) cfg.grid.min = to_double(mn, grid.key("D_min"));
        if (auto m = grid.get("D_max")) cfg.grid.max = to_double(*m, grid.key("D_max"));
        if (auto c = grid.get("D_count")) cfg.grid.count = static_cast<int>(to_int(*c, grid.key("D_count")));
        const std::string sp = grid.get("spacing").value_or("linear");
        if (sp != "linear" && sp != "log") throw ConfigError("[grid] spacing must be linear or log");
        cfg.grid.log_spacing = sp == "log";
        if (cfg.grid.count < 1) throw ConfigError("[grid] D_count must be positive");
        if (!cfg.grid.auto_min && !(cfg.grid.min > 0 && cfg.grid.min <= cfg.grid.max))
            throw ConfigError("[grid] need 0 < D_min <= D_max");
    }
    for (double d : cfg.grid.values)
        if (!(d > 0)) throw ConfigError("[grid] D values must be positive");
    grid.check_unused();

    Section sim = section("sim");
    if (auto v = sim.get("horizon")) cfg.horizon = to_u64(*v, sim.key("horizon"));
    if (auto v = sim.get("burn_in")) cfg.burn_in = to_u64(*v, sim.key("burn_in"));
    if (auto v = sim.get("realizations")) cfg.realizations = static_cast<int>(to_int(*v, sim.key("realizations")));
    if (auto v = sim.get("margin")) cfg.margin = to_double(*v, sim.key("margin"));
    if (auto v = sim.get("noise")) {
        if (*v == "ecdq")
            cfg.noise = ChannelNoise::ecdq;
        else if (*v == "awgn")
            cfg.noise = ChannelNoise::awgn;
        else if (*v == "ideal")
            cfg.noise = ChannelNoise::ideal;
        else
            throw ConfigError("[sim] noise must be ecdq, awgn or ideal");
    }
    if (cfg.horizon <= cfg.burn_in + 20) throw ConfigError("[sim] horizon must exceed burn_in by more than 20");
    if (cfg.realizations < 1) throw ConfigError("[sim] realizations must be positive");
    if (!(cfg.margin >= 0 && cfg.margin < 1)) throw ConfigError("[sim] margin must lie in [0, 1)");
    sim.check_unused();

    Section seeds = section("seeds");
    if (auto v = seeds.get("noise")) cfg.seeds.noise = to_u64(*v, seeds.key("noise"));
    if (auto v = seeds.get("dither")) cfg.seeds.dither = to_u64(*v, seeds.key("dither"));
    if (auto v = seeds.get("delay")) cfg.seeds.delay = to_u64(*v, seeds.key("delay"));
    seeds.check_unused();

    Section sol = section("solver");
    PhiOptions& o = cfg.solver;
    if (auto v = sol.get("fir_order")) o.fir_order = static_cast<int>(to_int(*v, sol.key("fir_order")));
    if (auto v = sol.get("max_fir_order")) o.max_fir_order = static_cast<int>(to_int(*v, sol.key("max_fir_order")));
    if (auto v = sol.get("truncation_tol")) o.truncation_tol = to_double(*v, sol.key("truncation_tol"));
    if (auto v = sol.get("bracket_tol")) o.bracket_tol = to_double(*v, sol.key("bracket_tol"));
    if (auto v = sol.get("max_decoder_iterations"))
        o.max_decoder_iterations = static_cast<int>(to_int(*v, sol.key("max_decoder_iterations")));
    if (auto v = sol.get("decoder_tol")) o.decoder_tol = to_double(*v, sol.key("decoder_tol"));
    if (auto v = sol.get("adapt_decoder")) {
        if (*v != "true" && *v != "false") throw ConfigError("[solver] adapt_decoder must be true or false");
        o.adapt_decoder = *v == "true";
    }
    if (o.fir_order < 2 || o.max_fir_order < o.fir_order) throw ConfigError("[solver] need 2 <= fir_order <= max_fir_order");
    sol.check_unused();

    Section out = section("output");
    if (auto v = out.get("dir")) cfg.out_dir = *v;
    out.check_unused();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "[plant]\n";
    if (!cfg.plant_file.empty()) {
        os << "file = " << cfg.plant_file << "\n";
    } else {
        const GeneralizedPlant& G = cfg.plant;
        const bool scalar = G.nz() == 1 && G.nw() == 1;
        if (!scalar) os << "nz = " << G.nz() << "\nnw = " << G.nw() << "\n";
        for (int i = 0; i < G.nz(); ++i)
            for (int j = 0; j < G.nw(); ++j) write_tf(os, scalar ? "G11" : fmt::format("G11.{}.{}", i, j), G.G11[i][j]);
        for (int i = 0; i < G.nz(); ++i) write_tf(os, scalar ? "G12" : fmt::format("G12.{}", i), G.G12[i]);
        for (int j = 0; j < G.nw(); ++j) write_tf(os, scalar ? "G21" : fmt::format("G21.{}", j), G.G21[j]);
        write_tf(os, "G22", G.G22);
    }
    os << "\n[delays]\nh =";
    for (int h : cfg.h) os << " " << h;
    os << "\n";
    if (cfg.delay_mode == DelaySpec::Mode::random) {
        os << "mode = random\nsupport =";
        for (const auto& [h, a] : cfg.support) os << fmt::format(" {}:{:.17g}", h, a);
        os << "\n";
    } else {
        os << "mode = constant\n";
    }
    os << "\n[grid]\n";
    if (!cfg.grid.values.empty()) {
        os << "D = " << fmt_list(cfg.grid.values) << "\n";
    } else {
        os << "D_min = " << (cfg.grid.auto_min ? std::string("auto") : fmt::format("{:.17g}", cfg.grid.min)) << "\n";
        os << fmt::format("D_max = {:.17g}\nD_count = {}\nspacing = {}\n", cfg.grid.max, cfg.grid.count,
                          cfg.grid.log_spacing ? "log" : "linear");
    }
    os << fmt::format("\n[sim]\nhorizon = {}\nburn_in = {}\nrealizations = {}\nmargin = {:.17g}\nnoise = {}\n",
                      cfg.horizon, cfg.burn_in, cfg.realizations, cfg.margin, noise_name(cfg.noise));
    os << fmt::format("\n[seeds]\nnoise = {}\ndither = {}\ndelay = {}\n", cfg.seeds.noise, cfg.seeds.dither,
                      cfg.seeds.delay);
    const PhiOptions& o = cfg.solver;
    os << fmt::format(
        "\n[solver]\nfir_order = {}\nmax_fir_order = {}\ntruncation_tol = {:.17g}\nbracket_tol = {:.17g}\n"
        "max_decoder_iterations = {}\ndecoder_tol = {:.17g}\nadapt_decoder = {}\n",
        o.fir_order, o.max_fir_order, o.truncation_tol, o.bracket_tol, o.max_decoder_iterations, o.decoder_tol,
        o.adapt_decoder ? "true" : "false");
    os << "\n[output]\ndir = " << cfg.out_dir << "\n";
    return os.str();
}

std::vector<double> d_grid(const ExperimentConfig& cfg) {
    if (!cfg.grid.values.empty()) return cfg.grid.values;
    double lo = cfg.grid.min;
    if (cfg.grid.auto_min) {
        int hmax = 0;
        for (int h : cfg.h) hmax = std::max(hmax, h);
        if (cfg.delay_mode == DelaySpec::Mode::random) hmax = std::max(hmax, cfg.support.back().first);
        lo = 1.05 * d_inf(cfg.plant, hmax);
    }
    const double hi = cfg.grid.max;
    const int n = cfg.grid.count;
    if (!(hi >= lo)) throw ConfigError(fmt::format("[grid] D_max {} lies below the grid start {}", hi, lo));
    std::vector<double> out;
    for (int i = 0; i < n; ++i) {
        const double f = n == 1 ? 1.0 : static_cast<double>(i) / (n - 1);
        out.push_back(cfg.grid.log_spacing ? lo * std::pow(hi / lo, f) : lo + f * (hi - lo));
    }
    return out;
}

}  // namespace netrate
