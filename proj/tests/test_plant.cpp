#include "netrate/cli.hpp"
#include "netrate/oracles.hpp"
#include "netrate/plant.hpp"
#include "netrate/simulator.hpp"
#include "netrate/synthesis.hpp"
#include "netrate/testkit.hpp"

#include <doctest.h>

#include <numeric>

using namespace netrate;

namespace {

RationalTransfer first_order(double a) { return RationalTransfer({0.0, 1.0}, {1.0, -a}); }

const CheckItem& item(const ValidationReport& r, const std::string& name) {
    for (const auto& i : r.items)
        if (i.name == name) return i;
    FAIL("missing check " << name);
    return r.items.front();
}

double sample_var(const std::vector<double>& x, size_t from) {
    const double n = static_cast<double>(x.size() - from);
    const double m = std::accumulate(x.begin() + from, x.end(), 0.0) / n;
    double s = 0;
    for (size_t i = from; i < x.size(); ++i) s += (x[i] - m) * (x[i] - m);
    return s / n;
}

}  // namespace

TEST_CASE("validate_assumption1") {
    const auto bench = validate_assumption1(benchmark_plant());
    CHECK(bench.ok());
    for (const auto& i : bench.items) CHECK_MESSAGE(i.pass, i.name << ": " << i.detail);

    const RationalTransfer g = first_order(0.5);
    const auto bi = validate_assumption1(GeneralizedPlant::siso(g, g, g, RationalTransfer({1.0, -0.1}, {1.0, -0.5})));
    CHECK_FALSE(bi.ok());
    CHECK_FALSE(item(bi, "G22 strictly proper").pass);

    // (z - 2)/((z - 2)(z - 0.5)): the unstable mode is hidden
    const RationalTransfer hid({0.0, 1.0, -2.0}, {1.0, -2.5, 1.0});
    const auto h = validate_assumption1(GeneralizedPlant::siso(g, g, g, hid));
    CHECK_FALSE(h.ok());
    CHECK_FALSE(item(h, "no unstable hidden modes").pass);
}

TEST_CASE("delay_augment") {
    const GeneralizedPlant G = benchmark_plant();
    const GeneralizedPlant G0 = delay_augment(G, 0);
    for (double w : {0.2, 1.0, 2.5}) {
        CHECK(std::abs(freq_response(G0.G12[0], w) - freq_response(G.G12[0], w)) < 1e-12);
        CHECK(std::abs(freq_response(G0.G22, w) - freq_response(G.G22, w)) < 1e-12);
    }
    const GeneralizedPlant G2 = delay_augment(G, 2);
    for (double w : {0.2, 1.0, 2.5}) {
        const cplx d = std::exp(cplx(0, -2 * w));
        CHECK(std::abs(freq_response(G2.G12[0], w) - d * freq_response(G.G12[0], w)) < 1e-10);
        CHECK(std::abs(freq_response(G2.G22, w) - d * freq_response(G.G22, w)) < 1e-10);
        CHECK(std::abs(freq_response(G2.G11[0][0], w) - freq_response(G.G11[0][0], w)) < 1e-12);
        CHECK(std::abs(freq_response(G2.G21[0], w) - freq_response(G.G21[0], w)) < 1e-12);
    }
    auto p = poles(G2.G22);
    int at_zero = 0;
    for (const cplx& z : p) at_zero += std::abs(z) < 1e-6;
    CHECK(at_zero == 2);
    CHECK(p.size() == poles(G.G22).size() + 2);
    CHECK(realize(G2).nx() == realize(G).nx() + 2);
}

TEST_CASE("closed_loop_T with zero feedback") {
    const RationalTransfer g = first_order(0.5), zero = RationalTransfer::constant(0.0);
    const GeneralizedPlant G = GeneralizedPlant::siso(g, g, g, g);
    const double s = 0.7;
    const LinearScheme open = LinearScheme::from_transfer(zero, zero, RationalTransfer::constant(1.0), s);
    for (int h : {0, 1, 3}) {
        const TransferMatrix T = closed_loop_T(G, open, h);
        CHECK(is_internally_stable(T));
        CHECK(std::abs(freq_response(T.entry(kR, kEta), 0.3)(0, 0) - 1.0) < 1e-12);
        const auto sv = snr_and_variance(G, open, h);
        CHECK(sv.snr == doctest::Approx(0.0));
        CHECK(sv.var_z == doctest::Approx(h2_norm_sq(g) + h2_norm_sq(g) * s).epsilon(1e-10));
    }
}

TEST_CASE("internal stability predicate") {
    const RationalTransfer zero = RationalTransfer::constant(0.0);
    CHECK(is_internally_stable(TransferMatrix::from_entries({{zero, zero}, {zero, zero}})));
    CHECK_FALSE(is_internally_stable(TransferMatrix::from_entries({{zero, first_order(2.0)}, {zero, zero}})));

    const GeneralizedPlant B = benchmark_plant();
    const RationalTransfer one = RationalTransfer::constant(1.0);
    CHECK_FALSE(is_internally_stable(closed_loop_T(B, LinearScheme::from_transfer(zero, zero, one, 1.0), 0)));
    CHECK_THROWS_AS(snr_and_variance(B, LinearScheme::from_transfer(zero, zero, one, 1.0), 0), UnstableSystem);
}

TEST_CASE("synthesised benchmark schemes are internally stable") {
    const GeneralizedPlant G = benchmark_plant();
    for (int h : {0, 1, 2}) {
        const PhiResult p = phi_prime(G, h, 10.0);
        const TransferMatrix T = closed_loop_T(G, p.scheme, h);
        CHECK(is_internally_stable(T));
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) CHECK(is_stable(T.entry(i, j)));
    }
}

TEST_CASE("T equals T_a on random schemes") {
    testkit::Rng g(21);
    for (int t = 0; t < 20; ++t) {
        const int h = t % 4;
        const GeneralizedPlant G = testkit::random_stable_plant(g, 1 + t % 2, 1 + (t / 2) % 2);
        const LinearScheme s = testkit::random_scheme(g, G, h);
        CHECK(oracle::t_ta_residual(G, s, h) <= 1e-9);
        const auto [snr, var] = oracle::delay_absorbed_residual(G, s, h);
        CHECK(snr <= 1e-8);
        CHECK(var <= 1e-8);
    }
}

TEST_CASE("variance is nondecreasing in the channel noise") {
    testkit::Rng g(22);
    for (int t = 0; t < 10; ++t) {
        const GeneralizedPlant G = testkit::random_stable_plant(g);
        const LinearScheme s = testkit::random_scheme(g, G, 1);
        double prev = -1;
        for (double sig : {0.1, 0.5, 1.0, 3.0}) {
            const double v = snr_and_variance(G, s.with_sigma(sig), 1).var_z;
            CHECK(v >= prev - 1e-12);
            prev = v;
        }
    }
}

TEST_CASE("snr and variance against a time-domain run") {
    const GeneralizedPlant G = benchmark_plant();
    const int h = 1;
    const PhiResult p = phi_prime(G, h, 10.0);
    const auto sv = snr_and_variance(G, p.scheme, h);
    SimConfig c;
    c.plant = G;
    c.scheme = p.scheme;
    c.delta = std::sqrt(12.0 * p.scheme.sigma_eta_sq());
    c.delays = DelaySpec::constant(h);
    c.noise = ChannelNoise::awgn;
    c.record_trace = true;
    const SimResult r = simulate_constant(c);
    CHECK(std::abs(r.var_z_hat - sv.var_z) <= 0.02 * sv.var_z);
    const double snr_hat = sample_var(r.trace.t, c.burn_in) / p.scheme.sigma_eta_sq();
    CHECK(std::abs(snr_hat - sv.snr) <= 0.02 * sv.snr);
}

TEST_CASE("scheme transfer accessors") {
    const RationalTransfer br({0.2, 0.1}, {1.0, -0.3}), by({0.5}, {1.0}), j({1.0, 0.4}, {1.0, 0.2});
    const LinearScheme s = LinearScheme::from_transfer(br, by, j, 2.0);
    for (double w : {0.1, 1.7}) {
        CHECK(std::abs(freq_response(s.Br(), w) - freq_response(br, w)) < 1e-10);
        CHECK(std::abs(freq_response(s.By(), w) - freq_response(by, w)) < 1e-10);
        CHECK(std::abs(freq_response(s.J(), w) - freq_response(j, w)) < 1e-10);
    }
    CHECK(s.sigma_eta_sq() == 2.0);
    CHECK_THROWS(LinearScheme::from_transfer(br, by, j, 0.0));
}
