#pragma once

#include "netrate/lti.hpp"

#include <string>
#include <vector>

namespace netrate {

using TfGrid = std::vector<std::vector<RationalTransfer>>;

// [z; y] = [G11 G12; G21 G22] [w; u], scalar u and y.
struct GeneralizedPlant {
    TfGrid G11;                        // n_z x n_w
    std::vector<RationalTransfer> G12;  // n_z
    std::vector<RationalTransfer> G21;  // n_w
    RationalTransfer G22;

    int nz() const { return static_cast<int>(G12.size()); }
    int nw() const { return static_cast<int>(G21.size()); }
    void check_dimensions() const;

    static GeneralizedPlant siso(const RationalTransfer& g11, const RationalTransfer& g12,
                                 const RationalTransfer& g21, const RationalTransfer& g22);
};

// x+ = A x + B1 w + B2 u,  z = C1 x + D11 w + D12 u,  y = C2 x + D21 w + D22 u
struct PlantRealization {
    Mat A, B1, B2, C1, C2, D11, D12, D21, D22;
    int nx() const { return static_cast<int>(A.rows()); }
    int nw() const { return static_cast<int>(B1.cols()); }
    int nz() const { return static_cast<int>(C1.rows()); }
    StateSpace as_state_space() const;  // inputs [w; u], outputs [z; y]
};

PlantRealization realize(const GeneralizedPlant& G);

struct CheckItem {
    std::string name;
    bool pass;
    std::string detail;
};

struct ValidationReport {
    std::vector<CheckItem> items;
    bool ok() const;
};

ValidationReport validate_assumption1(const GeneralizedPlant& G);

GeneralizedPlant delay_augment(const GeneralizedPlant& G, int h);

// t = Br z^-1 r + By y, u = J z^-h r, r = t + eta.
// The encoder is stored as a two-input realisation with inputs (r(k-1), y(k)).
class LinearScheme {
public:
    LinearScheme() = default;
    LinearScheme(StateSpace encoder, StateSpace decoder, double sigma_eta_sq);
    static LinearScheme from_transfer(const RationalTransfer& Br, const RationalTransfer& By,
                                      const RationalTransfer& J, double sigma_eta_sq);

    const StateSpace& encoder() const { return enc_; }
    const StateSpace& decoder() const { return dec_; }
    double sigma_eta_sq() const { return s_; }
    LinearScheme with_sigma(double s) const;

    RationalTransfer Br() const;
    RationalTransfer By() const;
    RationalTransfer J() const;

private:
    StateSpace enc_, dec_;
    double s_ = 1.0;
};

enum TIn { kEta = 0, kW = 1, kPsi1 = 2, kPsi2 = 3 };
enum TOut { kZ = 0, kY = 1, kR = 2, kU = 3 };

// Map [eta, w, psi1, psi2] -> [z', y', r, u'] with u' = J r + psi1 taken before
// the channel delay.
TransferMatrix closed_loop_T(const GeneralizedPlant& G, const LinearScheme& scheme, int h);
TransferMatrix closed_loop_T(const PlantRealization& P, const LinearScheme& scheme, int h);

bool is_internally_stable(const TransferMatrix& T);

struct SnrVariance {
    double snr;
    double var_z;
};
SnrVariance snr_and_variance(const GeneralizedPlant& G, const LinearScheme& scheme, int h);
SnrVariance snr_and_variance(const TransferMatrix& T, double sigma_eta_sq);

}  // namespace netrate
