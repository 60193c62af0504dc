#pragma once

// Independent reference computations used by verify and the acceptance run.

#include "netrate/plant.hpp"

namespace netrate::oracle {

// (1/2pi) int trace(H H*) dw by the periodic trapezoid rule
double h2_quadrature(const StateSpace& s, int points = 4096);

// max entrywise |T(e^jw) - T_a(e^jw)| over a grid, T_a on the delay-absorbed plant
double t_ta_residual(const GeneralizedPlant& G, const LinearScheme& scheme, int h, int points = 128);

// relative differences of (snr, var) between the loop with channel delay and
// the delay-absorbed loop
std::pair<double, double> delay_absorbed_residual(const GeneralizedPlant& G, const LinearScheme& scheme, int h);

// x+ = a x + w + u, z = y = x; static schemes t = k y, u = t + eta on a
// dense (k, sigma^2) grid, minimum SNR with variance <= D
struct StaticOptimum {
    double snr, k, s;
};
StaticOptimum scalar_static_bruteforce(double a, double D, int k_points = 2001, int s_points = 2001);

}  // namespace netrate::oracle
