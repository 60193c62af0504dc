#pragma once

// Random systems for property checks (shared by verify and the test suites).

#include "netrate/plant.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace netrate::testkit {

using Rng = std::mt19937_64;

inline double unif(Rng& g, double a, double b) { return std::uniform_real_distribution<double>(a, b)(g); }
inline double gauss(Rng& g) { return std::normal_distribution<double>(0.0, 1.0)(g); }

inline StateSpace random_stable_ss(Rng& g, int n, int m, int p, double max_radius = 0.9) {
    Mat A(n, n), B(n, m), C(p, n), D(p, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = gauss(g);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) B(i, j) = gauss(g);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < n; ++j) C(i, j) = gauss(g);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < m; ++j) D(i, j) = gauss(g);
    if (n > 0) {
        const double rho = spectral_radius(A);
        if (rho > 0) A *= unif(g, 0.2, max_radius) / rho;
    }
    return StateSpace(A, B, C, D);
}

// poles inside radius r, real or conjugate pairs
inline std::vector<double> random_stable_den(Rng& g, int order, double r = 0.9) {
    std::vector<cplx> roots;
    while (static_cast<int>(roots.size()) < order) {
        const double mag = unif(g, 0.0, r);
        if (order - static_cast<int>(roots.size()) >= 2 && unif(g, 0, 1) < 0.5) {
            const double th = unif(g, 0.1, std::numbers::pi - 0.1);
            roots.push_back(std::polar(mag, th));
            roots.push_back(std::polar(mag, -th));
        } else {
            roots.push_back(unif(g, 0, 1) < 0.5 ? mag : -mag);
        }
    }
    // descending z coefficients read as ascending z^-1 coefficients
    return poly_from_roots(roots);
}

inline RationalTransfer random_stable_tf(Rng& g, int order, bool strictly_proper, double gain = 1.0) {
    std::vector<double> num(order + 1);
    for (auto& c : num) c = gain * gauss(g);
    if (strictly_proper) num[0] = 0.0;
    return RationalTransfer(num, random_stable_den(g, order));
}

inline GeneralizedPlant random_stable_plant(Rng& g, int nz = 1, int nw = 1) {
    GeneralizedPlant G;
    G.G11.assign(nz, std::vector<RationalTransfer>(nw));
    G.G12.resize(nz);
    G.G21.resize(nw);
    for (auto& row : G.G11)
        for (auto& e : row) e = random_stable_tf(g, 1 + static_cast<int>(g() % 2), false);
    for (auto& e : G.G12) e = random_stable_tf(g, 1 + static_cast<int>(g() % 2), false);
    for (auto& e : G.G21) e = random_stable_tf(g, 1 + static_cast<int>(g() % 2), false);
    G.G22 = random_stable_tf(g, 1 + static_cast<int>(g() % 2), true);
    return G;
}

// Low-gain scheme with memory; stable pieces on a stable plant keep the loop
// stable once the gain is small enough.
inline LinearScheme random_scheme(Rng& g, const GeneralizedPlant& G, int h) {
    for (double gain = 0.5;; gain *= 0.5) {
        const RationalTransfer Br = random_stable_tf(g, 1 + static_cast<int>(g() % 2), false, gain);
        const RationalTransfer By = random_stable_tf(g, 1 + static_cast<int>(g() % 2), false, gain);
        std::vector<double> jn{1.0, gauss(g) * 0.5};
        const RationalTransfer J(jn, random_stable_den(g, 1));
        const LinearScheme s = LinearScheme::from_transfer(Br, By, J, unif(g, 0.2, 2.0));
        if (is_internally_stable(closed_loop_T(G, s, h))) return s;
    }
}

}  // namespace netrate::testkit
