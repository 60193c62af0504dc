// End-to-end acceptance run: one PASS/FAIL line per criterion.

#include "netrate/cli.hpp"
#include "netrate/oracles.hpp"
#include "netrate/simulator.hpp"
#include "netrate/synthesis.hpp"
#include "netrate/testkit.hpp"

#include <fmt/core.h>

#include <chrono>
#include <functional>
#include <map>

using namespace netrate;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

GeneralizedPlant scalar_plant(double a) {
    const RationalTransfer g({0.0, 1.0}, {1.0, -a});
    return GeneralizedPlant::siso(g, g, g, g);
}

SimConfig sim_config(const GeneralizedPlant& G, const EcdqDesign& e, int h) {
    SimConfig c;
    c.plant = G;
    c.scheme = e.scheme;
    c.delta = e.delta;
    c.delays = DelaySpec::constant(h);
    return c;
}

double sample_var(const std::vector<double>& x, std::size_t from) {
    double m = 0;
    for (std::size_t i = from; i < x.size(); ++i) m += x[i];
    m /= static_cast<double>(x.size() - from);
    double v = 0;
    for (std::size_t i = from; i < x.size(); ++i) v += (x[i] - m) * (x[i] - m);
    return v / static_cast<double>(x.size() - from - 1);
}

const std::vector<int> kH{0, 1, 2};

// shared bounds sweep for criteria 1-3
struct Sweep {
    std::vector<double> D;
    std::map<std::pair<int, double>, BoundResult> b;
    double dinf[3];
};

Sweep bounds_sweep(const GeneralizedPlant& B) {
    Sweep s;
    for (int h : kH) s.dinf[h] = d_inf(B, h);
    ExperimentConfig cfg;
    cfg.plant = B;
    cfg.h = kH;
    cfg.grid.auto_min = true;
    cfg.grid.max = 50;
    cfg.grid.count = 12;
    cfg.grid.log_spacing = true;
    s.D = d_grid(cfg);
    s.D.push_back(1e6);
    for (int h : kH)
        for (double D : s.D) s.b[{h, D}] = compute_bounds(B, h, D);
    return s;
}

Outcome c1(const Sweep& s) {
    Outcome o;
    double worst = 0;
    for (const auto& [k, b] : s.b) worst = std::max(worst, std::abs(b.rate_ub_bits - b.rate_lb_bits - kEcdqGapBits));
    const double gap = 0.5 * std::log2(2 * std::numbers::pi * std::numbers::e / 12.0) + 1.0;
    o.require(worst <= 1e-9, fmt::format("gap deviation {:.2e}", worst));
    // 1.2546 truncated to three decimals
    o.require(std::abs(gap - 1.254) < 1e-3, fmt::format("gap {:.6f}", gap));
    o.detail = fmt::format("gap {:.6f} bits, max deviation {:.1e} over {} rows", gap, worst, s.b.size()) +
               (o.pass ? "" : " | " + o.detail);
    return o;
}

Outcome c2(const Sweep& s) {
    Outcome o;
    std::string d;
    for (int h : kH)
        for (double D : {50.0, 1e6}) {
            const double lb = s.b.at({h, D}).rate_lb_bits;
            o.require(std::abs(lb - 1.0) < 0.1, fmt::format("h={} D={:g} lb={:.4f}", h, D, lb));
            d += fmt::format(" h{}@{:g}={:.4f}", h, D, lb);
        }
    o.detail = "rate_lb:" + d + (o.pass ? "" : " | " + o.detail);
    return o;
}

Outcome c3(const Sweep& s) {
    Outcome o;
    o.require(s.dinf[0] < s.dinf[1] && s.dinf[1] < s.dinf[2],
              fmt::format("d_inf {:.6f} {:.6f} {:.6f}", s.dinf[0], s.dinf[1], s.dinf[2]));
    int checked = 0;
    for (double D : s.D) {
        for (int h = 1; h <= 2; ++h) {
            const double a = s.b.at({h - 1, D}).rate_lb_bits, b = s.b.at({h, D}).rate_lb_bits;
            o.require(b >= a - 1e-9, fmt::format("lb(h={}) < lb(h={}) at D={:g}", h, h - 1, D));
            ++checked;
        }
    }
    o.detail = fmt::format("d_inf = {:.6f} < {:.6f} < {:.6f}; {} pairs ordered", s.dinf[0], s.dinf[1], s.dinf[2],
                           checked) +
               (o.pass ? "" : " | " + o.detail);
    return o;
}

Outcome c4(const GeneralizedPlant& B) {
    Outcome o;
    double min_dh = INFINITY, max_dh = -INFINITY, max_rh = -INFINITY;
    int runs = 0;
    for (int h : kH)
        for (double D : {5.0, 10.0, 20.0, 35.0, 50.0}) {
            // the operational schemes are the lower-bound filters themselves, no variance margin
            const EcdqDesign e = design_ecdq_scheme(B, h, D, 0.0);
            const double lb = rate_lower_bound(phi_prime(B, h, D).value), ub = lb + kEcdqGapBits;
            SimConfig c = sim_config(B, e, h);
            c.horizon = c.burn_in + 1'000'000;
            const SimResult r = simulate_constant(c);
            const double R = r.rate_report.avg_len_bits, H = r.rate_report.empirical_entropy_bits;
            const std::string at = fmt::format("h={} D={:g}", h, D);
            o.require(R >= lb && R <= ub, fmt::format("{} rate {:.4f} outside [{:.4f}, {:.4f}]", at, R, lb, ub));
            o.require(std::abs(H - lb - 0.4) <= 0.15, fmt::format("{} H-lb {:.4f}", at, H - lb));
            o.require(R - H <= 0.35, fmt::format("{} R-H {:.4f}", at, R - H));
            min_dh = std::min(min_dh, H - lb);
            max_dh = std::max(max_dh, H - lb);
            max_rh = std::max(max_rh, R - H);
            ++runs;
        }
    o.detail = fmt::format("{} runs of 1e6 samples; H-lb in [{:.3f}, {:.3f}], max R-H {:.3f}", runs, min_dh, max_dh,
                           max_rh) +
               (o.pass ? "" : " | " + o.detail);
    return o;
}

Outcome c5(const GeneralizedPlant& B) {
    Outcome o;
    const int h = 1;
    const EcdqDesign e = design_ecdq_scheme(B, h, 10.0);
    SimConfig c = sim_config(B, e, h);
    c.horizon = c.burn_in + 100'000;
    c.record_trace = true;
    const SimResult s = simulate_constant(c);
    const std::vector<double> err(s.trace.r_minus_t.begin() + c.burn_in, s.trace.r_minus_t.end());
    const KsResult ks = ks_uniform(err, -e.delta / 2, e.delta / 2);
    const double bound = 4.0 / std::sqrt(static_cast<double>(err.size()));
    double worst = 0;
    int worst_lag = 0;
    for (int lag = 1; lag <= 20; ++lag) {
        const double a = std::abs(autocorrelation(err, lag));
        if (a > worst) worst = a, worst_lag = lag;
    }
    o.require(ks.p_value > 0.01, fmt::format("KS p = {:.4f}", ks.p_value));
    o.require(worst <= bound, fmt::format("lag {} autocorrelation {:.5f} > {:.5f}", worst_lag, worst, bound));
    o.detail = fmt::format("N = {}, KS p = {:.3f}, max |rho| = {:.5f} (lag {}) vs {:.5f}", err.size(), ks.p_value,
                           worst, worst_lag, bound) +
               (o.pass ? "" : " | " + o.detail);
    return o;
}

Outcome c6(const GeneralizedPlant& B) {
    Outcome o;
    testkit::Rng g(60);
    double worst = 0;
    for (int i = 0; i < 50; ++i) {
        const int n = 1 + static_cast<int>(g() % 6), m = 1 + static_cast<int>(g() % 3), p = 1 + static_cast<int>(g() % 3);
        const StateSpace s = testkit::random_stable_ss(g, n, m, p, 0.95);
        const double a = h2_norm_sq(s), b = oracle::h2_quadrature(s);
        worst = std::max(worst, std::abs(a - b) / std::max(b, 1e-300));
    }
    o.require(worst <= 1e-6, fmt::format("h2 rel {:.2e}", worst));

    const int h = 1;
    const PhiResult p = phi_prime(B, h, 10.0);
    const auto sv = snr_and_variance(B, p.scheme, h);
    SimConfig c;
    c.plant = B;
    c.scheme = p.scheme;
    c.delta = std::sqrt(12.0 * p.scheme.sigma_eta_sq());
    c.delays = DelaySpec::constant(h);
    c.noise = ChannelNoise::awgn;
    c.record_trace = true;
    const SimResult r = simulate_constant(c);
    const double dv = std::abs(r.var_z_hat - sv.var_z) / sv.var_z;
    const double snr_hat = sample_var(r.trace.t, c.burn_in) / p.scheme.sigma_eta_sq();
    const double ds = std::abs(snr_hat - sv.snr) / sv.snr;
    o.require(dv <= 0.02, fmt::format("variance off by {:.2f}%", 100 * dv));
    o.require(ds <= 0.02, fmt::format("snr off by {:.2f}%", 100 * ds));
    o.detail = fmt::format("h2 worst rel {:.1e} over 50 systems; Monte Carlo var {:.2f}%, snr {:.2f}%", worst, 100 * dv, 100 * ds) +
               (o.pass ? "" : " | " + o.detail);
    return o;
}

Outcome c7() {
    Outcome o;
    testkit::Rng g(70);
    double tt = 0, sv_rel = 0;
    for (int i = 0; i < 20; ++i) {
        const int h = static_cast<int>(g() % 4);
        const GeneralizedPlant G = testkit::random_stable_plant(g, 1 + static_cast<int>(g() % 2));
        const LinearScheme s = testkit::random_scheme(g, G, h);
        tt = std::max(tt, oracle::t_ta_residual(G, s, h, 128));
        const auto [a, b] = oracle::delay_absorbed_residual(G, s, h);
        sv_rel = std::max({sv_rel, a, b});
    }
    o.require(tt <= 1e-9, fmt::format("T - T_a {:.2e}", tt));
    o.require(sv_rel <= 1e-8, fmt::format("snr/var rel {:.2e}", sv_rel));
    o.detail = fmt::format("max |T - T_a| {:.1e} over 20 schemes x 128 points; snr/var rel {:.1e}", tt, sv_rel) +
               (o.pass ? "" : " | " + o.detail);
    return o;
}

Outcome c8() {
    Outcome o;
    const GeneralizedPlant S = scalar_plant(0.5);
    const double D = 1.2;
    const double phi = phi_prime(S, 0, D).value;
    const auto bf = oracle::scalar_static_bruteforce(0.5, D);
    const double rel = std::abs(phi - bf.snr) / bf.snr;
    const double d0 = d_inf(S, 0), d1 = d_inf(S, 1);
    o.require(rel <= 0.02, fmt::format("phi' {:.6f} vs {:.6f}", phi, bf.snr));
    o.require(std::abs(d0 - 1.0) <= 1e-6, fmt::format("d_inf(0) {:.9f}", d0));
    o.require(std::abs(d1 - 1.25) <= 1e-6, fmt::format("d_inf(1) {:.9f}", d1));
    o.detail = fmt::format("phi' {:.6f} vs brute force {:.6f} (rel {:.1e}); d_inf {:.9f}, {:.9f}", phi, bf.snr, rel, d0,
                           d1) +
               (o.pass ? "" : " | " + o.detail);
    return o;
}

Outcome c9(const GeneralizedPlant& B) {
    Outcome o;
    double worst = 0;
    for (int h : kH)
        for (double D : {5.0, 10.0, 50.0}) {
            const PhiResult p = phi_prime(B, h, D);
            const auto sv = snr_and_variance(B, p.scheme, h);
            const double d = std::abs(directed_info_linear(B, p.scheme, h) - rate_lower_bound(sv.snr));
            o.require(d <= 1e-3, fmt::format("h={} D={:g} off by {:.2e}", h, D, d));
            worst = std::max(worst, d);
        }
    o.detail = fmt::format("max deviation {:.1e} bits over 9 schemes", worst) + (o.pass ? "" : " | " + o.detail);
    return o;
}

Outcome c10(const GeneralizedPlant& B) {
    Outcome o;
    std::string d;
    for (double D : {10.0, 20.0}) {
        const EcdqDesign e = design_ecdq_scheme(B, 2, D);
        const double ub = rate_upper_bound(phi_prime(B, 2, D).value);
        SimConfig c = sim_config(B, e, 2);
        c.horizon = c.burn_in + 100'000;
        c.realizations = 50;
        c.delays = DelaySpec::random({{0, 1.0 / 3}, {1, 1.0 / 3}, {2, 1.0 / 3}}, c.seeds.delay);
        const SimResult r = simulate_random(c, 1);
        o.require(r.var_za - r.var_za_ci <= D, fmt::format("D={:g} var {:.4f} +- {:.4f}", D, r.var_za, r.var_za_ci));
        o.require(r.rate_a - r.rate_a_ci <= ub, fmt::format("D={:g} rate {:.4f} > ub {:.4f}", D, r.rate_a, ub));
        d += fmt::format(" D={:g}: var {:.3f}+-{:.3f}, rate {:.3f}+-{:.3f} <= {:.3f};", D, r.var_za, r.var_za_ci,
                         r.rate_a, r.rate_a_ci, ub);

        SimConfig one = c;
        one.realizations = 2;
        one.delays = DelaySpec::random({{2, 1.0}}, c.seeds.delay);
        const SimResult a = simulate_random(one, 1);
        SimConfig k = c;
        k.delays = DelaySpec::constant(2);
        const SimResult b = simulate_constant(k);
        o.require(a.realizations[0].var_z_hat == b.var_z_hat && a.realizations[0].rate == b.rate_report.avg_len_bits &&
                      a.realizations[0].entropy == b.rate_report.empirical_entropy_bits,
                  fmt::format("D={:g} degenerate support differs from constant delay", D));
    }
    o.detail = "M=50," + d + " single atom bit-identical" + (o.pass ? "" : " | " + o.detail);
    return o;
}

}  // namespace

int main() {
    const GeneralizedPlant B = benchmark_plant();
    std::optional<Sweep> sweep;
    auto get_sweep = [&]() -> const Sweep& {
        if (!sweep) sweep = bounds_sweep(B);
        return *sweep;
    };
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"analytic rate gap", [&] { return c1(get_sweep()); }},
        {"stability asymptote", [&] { return c2(get_sweep()); }},
        {"monotonicity in delay", [&] { return c3(get_sweep()); }},
        {"ECDQ operational rates", [&] { return c4(B); }},
        {"dither law", [&] { return c5(B); }},
        {"H2 oracle and Monte Carlo", [&] { return c6(B); }},
        {"T = T_a equivalence", [] { return c7(); }},
        {"phi' scalar oracle", [] { return c8(); }},
        {"spectral identity", [&] { return c9(B); }},
        {"random-delay reduction", [&] { return c10(B); }},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failures += !o.pass;
        fmt::print("{} {:2d} {}: {} [{:.1f}s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail, sec);
        std::fflush(stdout);
    }
    fmt::print("{}/{} criteria pass\n", criteria.size() - failures, criteria.size());
    return failures ? 1 : 0;
}
