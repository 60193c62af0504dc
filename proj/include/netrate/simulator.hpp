#pragma once

#include "netrate/channel.hpp"
#include "netrate/codec.hpp"
#include "netrate/plant.hpp"

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace netrate {

struct DivergenceError : std::runtime_error {
    DivergenceError(const std::string& what, std::uint64_t step) : std::runtime_error(what), step(step) {}
    std::uint64_t step;
};

inline constexpr double kDivergenceGuard = 1e12;

enum class Placement { channel, measurement, actuation };
// ecdq: dithered quantizer; awgn: Gaussian surrogate of equal variance;
// ideal: r = t
enum class ChannelNoise { ecdq, awgn, ideal };

struct Seeds {
    std::uint64_t noise = 1, dither = 2, delay = 3;
};

struct SimConfig {
    GeneralizedPlant plant;
    LinearScheme scheme;
    double delta = 1.0;
    DelaySpec delays;
    std::uint64_t horizon = 1'010'000;  // total steps, burn-in included
    std::uint64_t burn_in = 10'000;
    Seeds seeds;
    Placement placement = Placement::channel;
    ChannelNoise noise = ChannelNoise::ecdq;
    double x0_std = 0.0;  // > 0 draws a Gaussian initial plant state
    int realizations = 50;
    bool record_trace = false;
    int batches = 32;

    void validate() const;
};

struct SimTrace {
    std::vector<double> w, y, t, dither, r_minus_t, u, z;
    std::vector<std::int64_t> index, delivered;  // delivered: emit index used by the decoder, -1 if none
    std::vector<int> codeword_len;
    std::vector<int> delay;
};

struct VarianceEstimate {
    double var = 0;
    double ci = 0;  // 95% halfwidth
};

struct RealizationResult {
    std::uint64_t delay_seed = 0;
    double var_z_hat = 0, ci = 0, rate = 0, entropy = 0;
};

struct SimResult {
    double var_z_hat = 0;
    double ci_halfwidth = 0;
    RateReport rate_report;
    std::vector<RealizationResult> realizations;
    double var_za = 0, var_za_ci = 0;
    double rate_a = 0, rate_a_ci = 0;
    double entropy_a = 0;
    std::uint64_t emitted = 0, delivered = 0, in_flight = 0;
    SimTrace trace;
};

VarianceEstimate estimate_variance(const std::vector<double>& trace, std::size_t burn_in, int batches = 32);

SimResult simulate_constant(const SimConfig& cfg);
// same loop over a caller-supplied channel (test doubles)
SimResult simulate_with_channel(const SimConfig& cfg, Channel& channel, int decoder_lag);
SimResult simulate_random(const SimConfig& cfg, int jobs = 1);
SimResult placement_variant(const SimConfig& cfg);

// per-realization seeds; realization 0 keeps the base seeds
Seeds derived_seeds(const Seeds& base, int m);

void write_sim_trace(std::ostream& os, const SimTrace& tr);

// statistics helpers
double student_t_quantile(double p, double dof);
struct KsResult {
    double statistic;
    double p_value;
};
KsResult ks_uniform(std::vector<double> x, double lo, double hi);
double autocorrelation(const std::vector<double>& x, int lag);
double correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace netrate
