#include "netrate/synthesis.hpp"

#include <cmath>

namespace netrate {

BoundResult compute_bounds(const GeneralizedPlant& G, int h, double D, const PhiOptions& opt) {
    BoundResult b;
    b.D = D;
    b.d_inf = d_inf(G, h);
    const PhiResult p = phi_prime(G, h, D, opt);
    b.phi_prime = p.value;
    b.rate_lb_bits = rate_lower_bound(p.value);
    b.rate_ub_bits = rate_upper_bound(p.value);
    b.solver_gap = p.solver_gap();
    b.scheme = p.scheme;
    return b;
}

EcdqDesign design_ecdq_scheme(const GeneralizedPlant& G, int h, double D, double margin, const PhiOptions& opt) {
    if (!(margin >= 0.0 && margin < 1.0)) throw std::invalid_argument("margin must lie in [0, 1)");
    const double target = D * (1.0 - margin);
    if (!(target > d_inf(G, h)))
        throw InfeasiblePerformance("target variance with margin is at or below the performance floor");
    EcdqDesign out;
    out.phi = phi_prime(G, h, target, opt);
    // the decoder iteration already whitens r; the explicit transform only
    // runs when it stopped short, since it roughly doubles the scheme order
    const bool white = out.phi.whiteness_bits <= kWhitenThresholdBits;
    out.scheme = out.phi.value > 0 && !white ? whiten_scheme(G, out.phi.scheme, h) : out.phi.scheme;
    out.delta = std::sqrt(12.0 * out.scheme.sigma_eta_sq());
    return out;
}

double directed_info_linear(const GeneralizedPlant& G, const LinearScheme& scheme, int h, int grid) {
    const TransferMatrix T = closed_loop_T(G, scheme, h);
    if (!is_internally_stable(T)) throw UnstableSystem("closed loop is not internally stable");
    const StateSpace& full = T.realization();
    const int nz = T.row_sizes()[kZ], nw = T.col_sizes()[kW];
    const int u_row = nz + 2;
    std::vector<int> in{0};
    for (int j = 0; j < nw; ++j) in.push_back(1 + j);
    StateSpace us = full.select({u_row}, in);
    if (us.order() > 0 && spectral_radius(us.A) >= 1.0) us = minimal_realization(us);
    const double s = scheme.sigma_eta_sq();
    us.B.col(0) *= std::sqrt(s);
    us.D.col(0) *= std::sqrt(s);
    const FrequencyEvaluator ev(us);
    const std::vector<double> w = spectral_grid(grid);
    std::vector<double> S(w.size());
    for (size_t i = 0; i < w.size(); ++i) S[i] = ev(w[i]).squaredNorm();
    return log_spectral_integral(S, s) / std::log(2.0);
}

}  // namespace netrate
