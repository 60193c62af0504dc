#pragma once

#include "netrate/plant.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace netrate {

struct SynthesisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InfeasiblePerformance : SynthesisError {
    using SynthesisError::SynthesisError;
};

// 0.5 log2(2 pi e / 12) + 1
inline const double kEcdqGapBits = 0.5 * std::log2(2.0 * std::numbers::pi * std::numbers::e / 12.0) + 1.0;

// Observer-based central controller for a plant with D22 = 0:
// xh+ = A xh + B2 u + L e, e = y - C2 xh, u = F xh + v.
struct CentralController {
    Mat F, L;
};

// Quadratic LQG pieces of the unit-decoder problem for weight lambda.
struct LqgPoint {
    double lambda = 0;
    double a = 0;  // ||T_uw||^2
    double b = 0;  // ||T_zw||^2
    double value() const { return b + lambda * a; }
    double m = 0;  // min over monic M of ||M||^2 + ||G12 M||^2 / lambda
    double q0 = 0;
    CentralController K;
};

CentralController kalman_gain(const PlantRealization& P);
LqgPoint lqg_point(const PlantRealization& P, double lambda, const Mat& L);

double d_inf(const GeneralizedPlant& G, int h);

struct UnitDecoderResult {
    double value;
    double lambda;
    LqgPoint point;
};
// Optimum restricted to J = 1, solved through the two Riccati equations.
UnitDecoderResult phi_prime_unit_decoder(const GeneralizedPlant& G, int h, double D);

struct PhiOptions {
    int fir_order = 30;
    int max_fir_order = 240;
    double truncation_tol = 1e-3;
    double bracket_tol = 1e-9;
    int max_decoder_iterations = 300;
    double decoder_tol = 1e-10;
    bool adapt_decoder = true;  // false keeps J = 1
};

struct PhiResult {
    double value = 0;  // SNR achieved by the returned scheme
    double lower = 0;  // bisection bracket, fixed-decoder program
    double upper = 0;
    double lambda = 0;
    LinearScheme scheme;
    int fir_order = 0;
    int decoder_iterations = 0;
    double truncation_gap = 0;
    double whiteness_bits = 0;
    double unit_decoder_value = 0;
    double bracket_gap() const { return (upper - lower) / std::max(lower, 1.0); }
    double solver_gap() const { return std::max(bracket_gap(), truncation_gap); }
};

PhiResult phi_prime(const GeneralizedPlant& G, int h, double D, const PhiOptions& opt = {});

inline double rate_lower_bound(double phi) {
    if (phi < 0) throw std::domain_error("negative SNR");
    return 0.5 * std::log2(1.0 + phi);
}
inline double rate_upper_bound(double phi) { return rate_lower_bound(phi) + kEcdqGapBits; }

struct BoundResult {
    double D = 0;
    double d_inf = 0;
    double phi_prime = 0;
    double rate_lb_bits = 0;
    double rate_ub_bits = 0;
    double solver_gap = 0;
    LinearScheme scheme;
};
BoundResult compute_bounds(const GeneralizedPlant& G, int h, double D, const PhiOptions& opt = {});

inline constexpr double kWhitenThresholdBits = 1e-4;

struct EcdqDesign {
    LinearScheme scheme;
    double delta = 0;
    PhiResult phi;
};
EcdqDesign design_ecdq_scheme(const GeneralizedPlant& G, int h, double D, double margin = 0.05,
                              const PhiOptions& opt = {});

double directed_info_linear(const GeneralizedPlant& G, const LinearScheme& scheme, int h,
                            int grid = kSpectralGrid);

// Innovations form of a stationary output y = C x + D n driven by white n.
struct SpectralFactor {
    StateSpace omega;  // monic, minimum phase
    double innovation_variance;
};
SpectralFactor spectral_factor(const StateSpace& s);

// Replaces (B, J) by an equivalent scheme with white channel input r; the
// closed-loop maps to z and u are unchanged.
LinearScheme whiten_scheme(const GeneralizedPlant& G, const LinearScheme& scheme, int h);

}  // namespace netrate
