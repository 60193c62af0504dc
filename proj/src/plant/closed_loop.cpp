#include "netrate/plant.hpp"

#include <cmath>

namespace netrate {

TransferMatrix closed_loop_T(const PlantRealization& P, const LinearScheme& scheme, int h) {
    const int nw = P.nw(), nz = P.nz();
    Interconnect ic;
    const int plant = ic.add_block(P.as_state_space());
    const int chan = ic.add_block(delay_ss(h));
    const int enc = ic.add_block(scheme.encoder());
    const int back = ic.add_block(delay_ss(1));
    const int dec = ic.add_block(scheme.decoder());

    const int eta = ic.add_input(1), w = ic.add_input(nw), psi1 = ic.add_input(1), psi2 = ic.add_input(1);

    for (int j = 0; j < nw; ++j) ic.feed_from_input(plant, j, w, j);
    ic.feed_from_block(plant, nw, chan, 0);
    // u' = J r + psi1 enters the channel delay
    ic.feed_from_block(chan, 0, dec, 0);
    ic.feed_from_input(chan, 0, psi1, 0);
    // r = t + eta
    for (int blk : {back, dec}) {
        ic.feed_from_block(blk, 0, enc, 0);
        ic.feed_from_input(blk, 0, eta, 0);
    }
    ic.feed_from_block(enc, 0, back, 0);
    ic.feed_from_block(enc, 1, plant, nz);
    ic.feed_from_input(enc, 1, psi2, 0);

    for (int i = 0; i < nz; ++i) ic.output_from_block(ic.add_output(), plant, i);
    ic.output_from_block(ic.add_output(), plant, nz);
    const int r = ic.add_output();
    ic.output_from_block(r, enc, 0);
    ic.output_from_input(r, eta, 0);
    const int u = ic.add_output();
    ic.output_from_block(u, dec, 0);
    ic.output_from_input(u, psi1, 0);

    return TransferMatrix(ic.build(), {nz, 1, 1, 1}, {1, nw, 1, 1});
}

TransferMatrix closed_loop_T(const GeneralizedPlant& G, const LinearScheme& scheme, int h) {
    return closed_loop_T(realize(G), scheme, h);
}

bool is_internally_stable(const TransferMatrix& T) {
    const StateSpace& s = T.realization();
    if (s.order() == 0 || spectral_radius(s.A) < 1.0) return true;
    for (int i = 0; i < s.outputs(); ++i)
        for (int j = 0; j < s.inputs(); ++j) {
            const StateSpace e = minimal_realization(T.entry(i, j));
            if (e.order() > 0 && spectral_radius(e.A) >= 1.0) return false;
        }
    return true;
}

namespace {

double entry_h2(const StateSpace& b) {
    if (b.order() == 0 || spectral_radius(b.A) < 1.0) return h2_norm_sq(b);
    const StateSpace m = minimal_realization(b);
    if (m.order() > 0 && spectral_radius(m.A) >= 1.0) throw UnstableSystem("closed loop is not stable");
    return h2_norm_sq(m);
}

}  // namespace

SnrVariance snr_and_variance(const TransferMatrix& T, double s) {
    if (!is_internally_stable(T)) throw UnstableSystem("closed loop is not internally stable");
    StateSpace m = T.block(kR, kEta);
    m.D(0, 0) -= 1.0;
    const double snr = entry_h2(m) + entry_h2(T.block(kR, kW)) / s;
    const double var = entry_h2(T.block(kZ, kW)) + s * entry_h2(T.block(kZ, kEta));
    return {snr, var};
}

SnrVariance snr_and_variance(const GeneralizedPlant& G, const LinearScheme& scheme, int h) {
    return snr_and_variance(closed_loop_T(G, scheme, h), scheme.sigma_eta_sq());
}

}  // namespace netrate
