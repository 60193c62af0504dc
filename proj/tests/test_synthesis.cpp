#include "netrate/cli.hpp"
#include "netrate/oracles.hpp"
#include "netrate/synthesis.hpp"
#include "netrate/testkit.hpp"

#include <doctest.h>

using namespace netrate;

namespace {

GeneralizedPlant scalar_plant(double a) {
    const RationalTransfer g({0.0, 1.0}, {1.0, -a});
    return GeneralizedPlant::siso(g, g, g, g);
}

// x+ = a x + u + w, u(k) = k1 x(k-1) + k2 u(k-1); state [x, x(k-1), u(k-1)]
double delayed_loop_var(double a, double k1, double k2) {
    Mat A(3, 3);
    A << a, k1, k2, 1, 0, 0, 0, k1, k2;
    if (spectral_radius(A) >= 1.0) return INFINITY;
    Mat B = Mat::Zero(3, 1);
    B(0, 0) = 1;
    return dlyap(A, B * B.transpose())(0, 0);
}

}  // namespace

TEST_CASE("d_inf on the scalar plant") {
    const double a = 0.5;
    CHECK(std::abs(d_inf(scalar_plant(a), 0) - 1.0) < 1e-6);
    CHECK(std::abs(d_inf(scalar_plant(a), 1) - (1 + a * a)) < 1e-6);

    SUBCASE("gain sweeps agree") {
        double best0 = INFINITY;
        for (int i = 0; i <= 2000; ++i) {
            const double k = -1.5 + 2.0 * i / 2000;
            if (std::abs(a + k) < 1) best0 = std::min(best0, 1.0 / (1 - (a + k) * (a + k)));
        }
        CHECK(best0 == doctest::Approx(d_inf(scalar_plant(a), 0)).epsilon(1e-6));
        double best1 = INFINITY;
        for (int i = 0; i <= 200; ++i)
            for (int j = 0; j <= 200; ++j) best1 = std::min(best1, delayed_loop_var(a, -i / 200.0, -j / 200.0));
        CHECK(best1 >= d_inf(scalar_plant(a), 1) - 1e-9);
        CHECK(best1 == doctest::Approx(d_inf(scalar_plant(a), 1)).epsilon(1e-6));
    }
}

TEST_CASE("d_inf grows with the delay") {
    const GeneralizedPlant B = benchmark_plant();
    const double d0 = d_inf(B, 0), d1 = d_inf(B, 1), d2 = d_inf(B, 2);
    CHECK(d0 < d1);
    CHECK(d1 < d2);
    testkit::Rng g(31);
    for (int t = 0; t < 10; ++t) {
        GeneralizedPlant G = testkit::random_stable_plant(g);
        // one unstable pole in every path keeps the problem nontrivial
        const RationalTransfer u({0.0, 1.0}, {1.0, -1.3});
        G.G12[0] = G.G12[0] * u;
        G.G22 = G.G22 * u;
        double prev = 0;
        for (int h = 0; h <= 3; ++h) {
            const double d = d_inf(G, h);
            CHECK(d >= prev - 1e-9 * std::max(1.0, prev));
            prev = d;
        }
    }
}

TEST_CASE("rate bound helpers") {
    CHECK(rate_lower_bound(0) == 0.0);
    CHECK(rate_lower_bound(3) == doctest::Approx(1.0));
    CHECK(rate_lower_bound(1) == doctest::Approx(0.5));
    CHECK(rate_upper_bound(0) == doctest::Approx(1.2546).epsilon(1e-4));
    CHECK(rate_upper_bound(3) == doctest::Approx(2.2546).epsilon(1e-4));
    for (double p : {0.0, 0.3, 7.0, 1e4}) CHECK(std::abs(rate_upper_bound(p) - rate_lower_bound(p) - kEcdqGapBits) < 1e-12);
    CHECK_THROWS_AS(rate_lower_bound(-1.0), std::domain_error);
}

TEST_CASE("phi_prime on the scalar plant matches the static brute force") {
    const PhiResult p = phi_prime(scalar_plant(0.5), 0, 1.2);
    const auto bf = oracle::scalar_static_bruteforce(0.5, 1.2);
    CHECK(std::abs(p.value - bf.snr) <= 0.02 * bf.snr);
    CHECK(p.value <= bf.snr * (1 + 1e-6));
}

TEST_CASE("phi_prime on the benchmark") {
    const GeneralizedPlant B = benchmark_plant();
    for (double D : {5.0, 10.0, 50.0}) {
        double prev = 0;
        for (int h : {0, 1, 2}) {
            const PhiResult p = phi_prime(B, h, D);
            CHECK(p.value >= prev * (1 - 1e-6));
            prev = p.value;
            CHECK(p.bracket_gap() <= 1e-3);
            const TransferMatrix T = closed_loop_T(B, p.scheme, h);
            CHECK(is_internally_stable(T));
            const auto sv = snr_and_variance(B, p.scheme, h);
            CHECK(sv.var_z <= D * (1 + 1e-6));
            CHECK(sv.snr == doctest::Approx(p.value).epsilon(1e-6));
        }
    }
    SUBCASE("lower bound nonincreasing in D") {
        for (int h : {0, 2}) {
            double prev = INFINITY;
            for (double D : {5.0, 8.0, 15.0, 30.0, 50.0}) {
                const double lb = rate_lower_bound(phi_prime(B, h, D).value);
                CHECK(lb <= prev + 1e-9);
                prev = lb;
            }
        }
    }
    SUBCASE("large D approaches one bit") {
        for (int h : {0, 1, 2}) {
            CHECK(std::abs(rate_lower_bound(phi_prime(B, h, 50.0).value) - 1.0) < 0.1);
            CHECK(std::abs(rate_lower_bound(phi_prime(B, h, 1e6).value) - 1.0) < 0.1);
        }
    }
    SUBCASE("general decoder never worse than J = 1") {
        PhiOptions j1;
        j1.adapt_decoder = false;
        for (int h : {0, 2}) CHECK(phi_prime(B, h, 10.0).value <= phi_prime(B, h, 10.0, j1).value * (1 + 1e-9));
    }
}

TEST_CASE("phi_prime rejects D at or below d_inf") {
    const GeneralizedPlant B = benchmark_plant();
    CHECK_THROWS_AS(phi_prime(B, 1, d_inf(B, 1) * 0.99), InfeasiblePerformance);
    CHECK_THROWS_AS(design_ecdq_scheme(B, 0, d_inf(B, 0)), InfeasiblePerformance);
}

TEST_CASE("compute_bounds") {
    const BoundResult b = compute_bounds(benchmark_plant(), 1, 10.0);
    CHECK(b.D == 10.0);
    CHECK(b.rate_lb_bits == doctest::Approx(rate_lower_bound(b.phi_prime)));
    CHECK(std::abs(b.rate_ub_bits - b.rate_lb_bits - kEcdqGapBits) < 1e-9);
    CHECK(b.d_inf < b.D);
    CHECK(b.solver_gap <= 1e-3);
}

TEST_CASE("design_ecdq_scheme") {
    const GeneralizedPlant B = benchmark_plant();
    const EcdqDesign e = design_ecdq_scheme(B, 1, 10.0);
    CHECK(e.delta * e.delta / 12.0 == doctest::Approx(e.scheme.sigma_eta_sq()).epsilon(1e-14));
    const auto sv = snr_and_variance(B, e.scheme, 1);
    CHECK(sv.var_z <= 10.0 * 0.95 * (1 + 1e-6));
}

TEST_CASE("directed information of linear schemes") {
    const GeneralizedPlant B = benchmark_plant();
    for (int h : {0, 1, 2}) {
        const PhiResult p = phi_prime(B, h, 10.0);
        const double di = directed_info_linear(B, p.scheme, h);
        CHECK(std::abs(di - rate_lower_bound(p.value)) <= 1e-3);
        CHECK(std::abs(directed_info_linear(delay_augment(B, h), p.scheme, 0) - di) < 1e-9);
    }
    SUBCASE("open loop carries no information") {
        const RationalTransfer g({0.0, 1.0}, {1.0, -0.5}), zero = RationalTransfer::constant(0.0);
        const auto open = LinearScheme::from_transfer(zero, zero, RationalTransfer::constant(1.0), 0.8);
        CHECK(std::abs(directed_info_linear(GeneralizedPlant::siso(g, g, g, g), open, 2)) < 1e-12);
    }
}

TEST_CASE("whitening keeps the closed loop") {
    const GeneralizedPlant B = benchmark_plant();
    PhiOptions j1;
    j1.adapt_decoder = false;  // J = 1 leaves r coloured
    const PhiResult p = phi_prime(B, 1, 10.0, j1);
    const LinearScheme w = whiten_scheme(B, p.scheme, 1);
    const auto a = snr_and_variance(B, p.scheme, 1), b = snr_and_variance(B, w, 1);
    CHECK(b.var_z == doctest::Approx(a.var_z).epsilon(1e-6));
    // white r: directed information reaches 0.5 log2(1 + snr)
    CHECK(std::abs(directed_info_linear(B, w, 1) - rate_lower_bound(b.snr)) < 1e-3);
    CHECK(b.snr <= a.snr * (1 + 1e-6));
}

TEST_CASE("kalman gain and lqg point on the scalar plant") {
    const PlantRealization P = realize(scalar_plant(0.5));
    const CentralController K = kalman_gain(P);
    const Mat AL = P.A - K.L * P.C2;
    CHECK(spectral_radius(AL) < 1.0);
    const LqgPoint q = lqg_point(P, 1e-11, K.L);
    CHECK(q.b == doctest::Approx(1.0).epsilon(1e-6));
}
