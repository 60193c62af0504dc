#include "netrate/synthesis.hpp"
#include "probe.hpp"

#include <cmath>

namespace netrate {

namespace {

constexpr double kCheapControl = 1e-11;

struct LoopMaps {
    StateSpace u, z;  // from w
};

// Closed loop of the plant with u = F xh + q e, states (xh, x - xh).
LoopMaps unit_loop(const PlantRealization& P, const Mat& F, const Mat& L, double q) {
    const int n = P.nx();
    const Mat AF = P.A + P.B2 * F, AL = P.A - L * P.C2;
    const Mat G = P.B2 * q + L;
    Mat A = Mat::Zero(2 * n, 2 * n);
    A.topLeftCorner(n, n) = AF;
    A.topRightCorner(n, n) = G * P.C2;
    A.bottomRightCorner(n, n) = AL;
    Mat B(2 * n, P.nw());
    B << G * P.D21, P.B1 - L * P.D21;
    Mat Cu(1, 2 * n);
    Cu << F, q * P.C2;
    Mat Cz(P.nz(), 2 * n);
    Cz << P.C1 + P.D12 * F, P.C1 + P.D12 * q * P.C2;
    return {StateSpace(A, B, Cu, q * P.D21), StateSpace(A, B, Cz, P.D11 + P.D12 * q * P.D21)};
}

}  // namespace

CentralController kalman_gain(const PlantRealization& P) {
    const int n = P.nx();
    const Mat R = P.D21 * P.D21.transpose() + 1e-14 * Mat::Identity(1, 1);
    const DareResult f =
        dare(P.A.transpose(), P.C2.transpose(), P.B1 * P.B1.transpose(), R, P.B1 * P.D21.transpose());
    CentralController K;
    K.L = -f.K.transpose();
    K.F = Mat::Zero(1, n);
    return K;
}

LqgPoint lqg_point(const PlantRealization& P, double lambda, const Mat& L) {
    if (P.D22.cwiseAbs().maxCoeff() != 0.0) throw SynthesisError("G22 must be strictly proper");
    const Mat R = Mat::Constant(1, 1, lambda) + P.D12.transpose() * P.D12;
    const DareResult c = dare(P.A, P.B2, P.C1.transpose() * P.C1, R, P.C1.transpose() * P.D12);
    const Mat& F = c.K;
    auto eval = [&](double q) {
        const LoopMaps m = unit_loop(P, F, L, q);
        return std::pair{h2_norm_sq(m.u), h2_norm_sq(m.z)};
    };
    const auto [am, bm] = eval(-1.0);
    const auto [a0, b0] = eval(0.0);
    const auto [ap, bp] = eval(1.0);
    const double a2 = 0.5 * (ap + am) - a0, a1 = 0.5 * (ap - am);
    const double b2 = 0.5 * (bp + bm) - b0, b1 = 0.5 * (bp - bm);
    const double curv = b2 + lambda * a2;
    const double q0 = curv > 0 ? -(b1 + lambda * a1) / (2.0 * curv) : 0.0;
    const auto [a, b] = eval(q0);

    LqgPoint out;
    out.lambda = lambda;
    out.a = a;
    out.b = b;
    out.q0 = q0;
    out.m = (R(0, 0) + (P.B2.transpose() * c.P * P.B2)(0, 0)) / lambda;
    out.K = {F, L};
    return out;
}

double d_inf(const GeneralizedPlant& G, int h) {
    const auto rep = validate_assumption1(G);
    if (!rep.ok()) {
        std::string why;
        for (const auto& c : rep.items)
            if (!c.pass) why += c.name + ": " + c.detail + "; ";
        throw SynthesisError("plant fails validation: " + why);
    }
    const PlantRealization P = realize(delay_augment(G, h));
    const CentralController K = kalman_gain(P);
    return lqg_point(P, kCheapControl, K.L).b;
}

UnitDecoderResult phi_prime_unit_decoder(const GeneralizedPlant& G, int h, double D) {
    const PlantRealization P = realize(delay_augment(G, h));
    const Mat L = kalman_gain(P).L;
    auto at = [&](double ll) { return lqg_point(P, std::exp(ll), L); };
    double lo = -10.0, hi = 10.0;
    LqgPoint plo = at(lo), phi = at(hi);
    while (plo.value() > D) {
        lo -= 10.0;
        if (lo < -28.0) throw InfeasiblePerformance("target variance at or below the performance floor");
        plo = at(lo);
    }
    while (phi.value() < D) {
        hi += 10.0;
        if (hi > 60.0) break;
        phi = at(hi);
    }
    if (phi.value() < D) return {0.0, phi.lambda, phi};  // stable plant, target met open loop
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        LqgPoint pm = at(mid);
        if (pm.value() < D) {
            lo = mid;
            plo = pm;
        } else {
            hi = mid;
            phi = pm;
        }
        if ((plo.m - phi.m) <= 1e-12 * std::max(1.0, plo.m - 1.0)) break;
    }
    return {plo.m - 1.0, plo.lambda, plo};
}

SpectralFactor spectral_factor(const StateSpace& s) {
    if (s.outputs() != 1) throw DimensionError("spectral factor of a scalar process only");
    const double dd = (s.D * s.D.transpose())(0, 0);
    if (s.order() == 0) {
        return {StateSpace::gain(Mat::Identity(1, 1)), dd};
    }
    const Mat R = s.D * s.D.transpose() + 1e-14 * Mat::Identity(1, 1);
    const DareResult f =
        dare(s.A.transpose(), s.C.transpose(), s.B * s.B.transpose(), R, s.B * s.D.transpose());
    const Mat K = -f.K.transpose();
    const double pe = (s.C * f.P * s.C.transpose())(0, 0) + dd;
    return {StateSpace(s.A, K, s.C, Mat::Identity(1, 1)), pe};
}

LinearScheme whiten_scheme(const GeneralizedPlant& G, const LinearScheme& scheme, int h) {
    const TransferMatrix T = closed_loop_T(G, scheme, h);
    const StateSpace& full = T.realization();
    const int nz = T.row_sizes()[kZ];
    const int r_row = nz + 1;
    std::vector<int> in{0};
    for (int j = 0; j < T.col_sizes()[kW]; ++j) in.push_back(1 + j);
    StateSpace rs = full.select({r_row}, in);
    const double sd = std::sqrt(scheme.sigma_eta_sq());
    rs.B.col(0) *= sd;
    rs.D.col(0) *= sd;
    const SpectralFactor sf = spectral_factor(minimal_realization(rs));
    const StateSpace& Om = sf.omega;
    const StateSpace& E1 = scheme.encoder();
    const int no = Om.order(), ne = E1.order();
    auto step = [&](const Vec& x, const Vec& u, Vec& xn, Vec& y) {
        const Vec xi = x.head(no), x1 = x.tail(ne);
        const double a2 = u(0);
        const double a1 = a2 + (no ? (Om.C * xi)(0) : 0.0);
        Vec xi_n = no ? Vec(Om.A * xi + Om.B.col(0) * a2) : Vec(0);
        Vec in1(2);
        in1 << a1, u(1);
        const double t1 = (ne ? (E1.C * x1)(0) : 0.0) + (E1.D * in1)(0);
        Vec x1n = ne ? Vec(E1.A * x1 + E1.B * in1) : Vec(0);
        y.resize(1);
        y(0) = t1 - (no ? (Om.C * xi_n)(0) : 0.0);
        xn.resize(no + ne);
        xn << xi_n, x1n;
    };
    StateSpace enc2 = detail::probe_linear(no + ne, 2, 1, step);
    StateSpace dec2 = connect(Connection::series, Om, scheme.decoder());
    return LinearScheme(enc2, dec2, scheme.sigma_eta_sq());
}

}  // namespace netrate
