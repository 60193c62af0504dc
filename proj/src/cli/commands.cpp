#include "netrate/cli.hpp"

#include <fmt/format.h>

#include <atomic>
#include <fstream>
#include <functional>
#include <thread>

namespace netrate {

namespace {

void parallel_for(int n, int jobs, const std::function<void(int)>& f) {
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) f(i);
        });
    for (auto& th : pool) th.join();
}

std::string num(double v) { return std::isfinite(v) ? fmt::format("{:.10g}", v) : std::string(); }

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + p.string());
    os << text;
}

void write_columns(const std::filesystem::path& p, const std::vector<std::pair<std::string, std::string>>& cols) {
    std::string s = "column,provenance\n";
    for (const auto& [c, v] : cols) s += c + "," + v + "\n";
    write_file(p, s);
}

void write_manifest(const ExperimentConfig& cfg, const std::filesystem::path& dir, const std::string& command) {
    write_file(dir / "config.ini", serialize_config(cfg));
    write_file(dir / "manifest.txt",
               fmt::format("command={}\nprng={}\ngaussian=box-muller\ndither_stream=0x64697468\nseeds={}:{}:{}\n",
                           command, Philox4x32::name, cfg.seeds.noise, cfg.seeds.dither, cfg.seeds.delay));
}

std::filesystem::path prepare(const ExperimentConfig& cfg, const CommandOptions& opt) {
    std::filesystem::path dir = opt.out_dir.empty() ? std::filesystem::path(cfg.out_dir) : opt.out_dir;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string());
    return dir;
}

void note(const CommandOptions& opt, const std::string& msg) {
    if (opt.log) *opt.log << msg << "\n";
}

struct Point {
    int h;
    double D;
};

std::vector<Point> grid_points(const ExperimentConfig& cfg) {
    const std::vector<double> Ds = d_grid(cfg);
    std::vector<int> hs = cfg.h;
    if (cfg.delay_mode == DelaySpec::Mode::random) hs = {cfg.support.back().first};
    std::sort(hs.begin(), hs.end());
    hs.erase(std::unique(hs.begin(), hs.end()), hs.end());
    std::vector<double> ds = Ds;
    std::sort(ds.begin(), ds.end());
    std::vector<Point> pts;
    for (int h : hs)
        for (double D : ds) pts.push_back({h, D});
    return pts;
}

}  // namespace

int cmd_bounds(const ExperimentConfig& cfg, const CommandOptions& opt) {
    const auto dir = prepare(cfg, opt);
    const auto pts = grid_points(cfg);
    std::vector<std::string> rows(pts.size());
    std::vector<int> codes(pts.size(), kExitOk);
    parallel_for(static_cast<int>(pts.size()), opt.jobs, [&](int i) {
        const auto [h, D] = pts[i];
        double dinf = NAN;
        try {
            dinf = d_inf(cfg.plant, h);
            if (!(D > dinf)) {
                rows[i] = fmt::format("{},{},{},,,,,infeasible_below_d_inf", h, num(D), num(dinf));
                return;
            }
            const BoundResult b = compute_bounds(cfg.plant, h, D, cfg.solver);
            const char* status = b.solver_gap <= cfg.solver.truncation_tol ? "ok" : "widened_bracket";
            rows[i] = fmt::format("{},{},{},{},{},{},{},{}", h, num(D), num(b.d_inf), num(b.phi_prime),
                                  num(b.rate_lb_bits), num(b.rate_ub_bits), fmt::format("{:.3e}", b.solver_gap),
                                  status);
        } catch (const InfeasiblePerformance&) {
            rows[i] = fmt::format("{},{},{},,,,,infeasible_below_d_inf", h, num(D), num(dinf));
        } catch (const std::exception& e) {
            rows[i] = fmt::format("{},{},{},,,,,solver_failure", h, num(D), num(dinf));
            codes[i] = kExitSolver;
            note(opt, fmt::format("bounds h={} D={}: {}", h, D, e.what()));
        }
    });
    std::string out = "h,D,d_inf,phi_prime,rate_lb_bits,rate_ub_bits,solver_gap,status\n";
    for (const auto& r : rows) out += r + "\n";
    write_file(dir / "bounds.csv", out);
    write_columns(dir / "bounds.columns.csv", {{"h", "config"},
                                               {"D", "config"},
                                               {"d_inf", "computed"},
                                               {"phi_prime", "computed"},
                                               {"rate_lb_bits", "computed"},
                                               {"rate_ub_bits", "computed+analytic_constant"},
                                               {"solver_gap", "computed"},
                                               {"status", "computed"}});
    write_manifest(cfg, dir, "bounds");
    for (int c : codes)
        if (c != kExitOk) return c;
    return kExitOk;
}

int cmd_simulate(const ExperimentConfig& cfg, const CommandOptions& opt) {
    const auto dir = prepare(cfg, opt);
    const auto pts = grid_points(cfg);
    const bool random = cfg.delay_mode == DelaySpec::Mode::random;
    std::vector<std::string> rows(pts.size());
    std::vector<int> codes(pts.size(), kExitOk);
    const std::string seeds = fmt::format("{}:{}:{}", cfg.seeds.noise, cfg.seeds.dither, cfg.seeds.delay);
    // realizations run in parallel inside a random-mode point
    const int outer = random ? 1 : opt.jobs, inner = random ? opt.jobs : 1;
    parallel_for(static_cast<int>(pts.size()), outer, [&](int i) {
        const auto [h, D] = pts[i];
        const char* mode = random ? "random" : "constant";
        try {
            const EcdqDesign e = design_ecdq_scheme(cfg.plant, h, D, cfg.margin, cfg.solver);
            const PhiResult at_D = phi_prime(cfg.plant, h, D, cfg.solver);
            const double lb = rate_lower_bound(at_D.value), ub = rate_upper_bound(at_D.value);
            SimConfig sc;
            sc.plant = cfg.plant;
            sc.scheme = e.scheme;
            sc.delta = e.delta;
            sc.horizon = cfg.horizon;
            sc.burn_in = cfg.burn_in;
            sc.seeds = cfg.seeds;
            sc.noise = cfg.noise;
            sc.realizations = cfg.realizations;
            SimResult r;
            if (random) {
                sc.delays = DelaySpec::random(cfg.support, cfg.seeds.delay);
                r = simulate_random(sc, inner);
            } else {
                sc.delays = DelaySpec::constant(h);
                r = simulate_constant(sc);
            }
            const double rate = r.rate_report.avg_len_bits, H = r.rate_report.empirical_entropy_bits;
            const bool ecdq = cfg.noise == ChannelNoise::ecdq;
            const int var_ok = r.var_z_hat - r.ci_halfwidth <= D;
            const int in_bounds = ecdq && rate >= lb && rate <= ub;
            const int h_ge_lb = ecdq && H >= lb;
            rows[i] = fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},ok", h, num(D), mode, num(r.var_z_hat),
                                  num(r.ci_halfwidth), ecdq ? num(rate) : "", ecdq ? num(H) : "", num(lb), num(ub),
                                  seeds, var_ok, in_bounds, h_ge_lb);
        } catch (const InfeasiblePerformance&) {
            rows[i] = fmt::format("{},{},{},,,,,,,{},,,,infeasible_below_d_inf", h, num(D), mode, seeds);
        } catch (const DivergenceError& e) {
            rows[i] = fmt::format("{},{},{},,,,,,,{},,,,diverged", h, num(D), mode, seeds);
            codes[i] = kExitSolver;
            note(opt, fmt::format("simulate h={} D={}: {}", h, D, e.what()));
        } catch (const std::exception& e) {
            rows[i] = fmt::format("{},{},{},,,,,,,{},,,,solver_failure", h, num(D), mode, seeds);
            codes[i] = kExitSolver;
            note(opt, fmt::format("simulate h={} D={}: {}", h, D, e.what()));
        }
    });
    std::string out =
        "h,D,mode,var_z_hat,ci,rate_bits,entropy_bits,lb,ub,seeds,var_le_D,rate_in_bounds,entropy_ge_lb,status\n";
    for (const auto& r : rows) out += r + "\n";
    write_file(dir / "simulate.csv", out);
    write_columns(dir / "simulate.columns.csv", {{"h", "config"},
                                                 {"D", "config"},
                                                 {"mode", "config"},
                                                 {"var_z_hat", "simulated"},
                                                 {"ci", "simulated"},
                                                 {"rate_bits", "simulated"},
                                                 {"entropy_bits", "simulated"},
                                                 {"lb", "computed"},
                                                 {"ub", "computed+analytic_constant"},
                                                 {"seeds", "config"},
                                                 {"var_le_D", "simulated"},
                                                 {"rate_in_bounds", "simulated"},
                                                 {"entropy_ge_lb", "simulated"},
                                                 {"status", "computed"}});
    write_manifest(cfg, dir, "simulate");
    for (int c : codes)
        if (c != kExitOk) return c;
    return kExitOk;
}

}  // namespace netrate
