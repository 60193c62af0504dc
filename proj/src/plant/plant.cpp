#include "netrate/plant.hpp"

#include <Eigen/SVD>
#include <fmt/format.h>

#include <cmath>

namespace netrate {

void GeneralizedPlant::check_dimensions() const {
    if (G12.empty() || G21.empty()) throw DimensionError("plant needs n_z >= 1 and n_w >= 1");
    if (static_cast<int>(G11.size()) != nz()) throw DimensionError("G11 row count differs from n_z");
    for (const auto& row : G11)
        if (static_cast<int>(row.size()) != nw()) throw DimensionError("G11 column count differs from n_w");
}

GeneralizedPlant GeneralizedPlant::siso(const RationalTransfer& g11, const RationalTransfer& g12,
                                        const RationalTransfer& g21, const RationalTransfer& g22) {
    return GeneralizedPlant{{{g11}}, {g12}, {g21}, g22};
}

StateSpace PlantRealization::as_state_space() const {
    Mat B(nx(), nw() + 1), C(nz() + 1, nx()), D(nz() + 1, nw() + 1);
    B << B1, B2;
    C << C1, C2;
    D << D11, D12, D21, D22;
    return StateSpace(A, B, C, D);
}

PlantRealization realize(const GeneralizedPlant& G) {
    G.check_dimensions();
    const int nz = G.nz(), nw = G.nw();
    TfGrid grid(nz + 1, std::vector<RationalTransfer>(nw + 1));
    for (int i = 0; i < nz; ++i) {
        for (int j = 0; j < nw; ++j) grid[i][j] = G.G11[i][j];
        grid[i][nw] = G.G12[i];
    }
    for (int j = 0; j < nw; ++j) grid[nz][j] = G.G21[j];
    grid[nz][nw] = G.G22;
    const StateSpace s = TransferMatrix::from_entries(grid).realization();
    PlantRealization P;
    P.A = s.A;
    P.B1 = s.B.leftCols(nw);
    P.B2 = s.B.rightCols(1);
    P.C1 = s.C.topRows(nz);
    P.C2 = s.C.bottomRows(1);
    P.D11 = s.D.topLeftCorner(nz, nw);
    P.D12 = s.D.topRightCorner(nz, 1);
    P.D21 = s.D.bottomLeftCorner(1, nw);
    P.D22 = s.D.bottomRightCorner(1, 1);
    return P;
}

bool ValidationReport::ok() const {
    for (const auto& c : items)
        if (!c.pass) return false;
    return true;
}

namespace {

std::vector<cplx> unstable(const std::vector<cplx>& p) {
    std::vector<cplx> out;
    for (const cplx& z : p)
        if (std::abs(z) >= 1.0 - 1e-12) out.push_back(z);
    return out;
}

// unstable poles of the raw coefficient description that a minimal realisation drops
std::vector<cplx> hidden_unstable(const RationalTransfer& g) {
    if (g.is_zero()) return unstable(roots(g.den_z()));
    auto raw = unstable(roots(g.den_z()));
    auto kept = unstable(eigenvalues(minimal_realization(to_state_space(g)).A));
    std::vector<bool> used(kept.size(), false);
    std::vector<cplx> hidden;
    for (const cplx& p : raw) {
        bool found = false;
        for (size_t i = 0; i < kept.size(); ++i)
            if (!used[i] && std::abs(kept[i] - p) < 1e-6 * std::max(1.0, std::abs(p))) {
                used[i] = found = true;
                break;
            }
        if (!found) hidden.push_back(p);
    }
    return hidden;
}

bool pbh_rank(const Mat& A, const Mat& X, const cplx& l, bool input) {
    const int n = static_cast<int>(A.rows());
    Eigen::MatrixXcd M;
    if (input) {
        M.resize(n, n + X.cols());
        M << l * CMat::Identity(n, n) - A.cast<cplx>(), X.cast<cplx>();
    } else {
        M.resize(n + X.rows(), n);
        M << l * CMat::Identity(n, n) - A.cast<cplx>(), X.cast<cplx>();
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    const auto& sv = svd.singularValues();
    return sv(sv.size() - 1) > 1e-8 * std::max(1.0, sv(0));
}

std::string fmt_roots(const std::vector<cplx>& r) {
    std::string s;
    for (const cplx& z : r) s += fmt::format("{}{:.6g}{:+.6g}j", s.empty() ? "" : ", ", z.real(), z.imag());
    return "{" + s + "}";
}

}  // namespace

ValidationReport validate_assumption1(const GeneralizedPlant& G) {
    ValidationReport rep;
    try {
        G.check_dimensions();
    } catch (const std::exception& e) {
        rep.items.push_back({"dimensions", false, e.what()});
        return rep;
    }
    rep.items.push_back({"dimensions", true, fmt::format("n_z={} n_w={}", G.nz(), G.nw())});
    rep.items.push_back({"proper", true, "all blocks proper by representation"});
    rep.items.push_back({"G22 strictly proper", is_strictly_proper(G.G22),
                         fmt::format("G22 feedthrough {:.6g}", G.G22.num()[0])});

    std::string hidden_detail;
    auto note = [&](const std::string& name, const RationalTransfer& g) {
        auto h = hidden_unstable(g);
        if (!h.empty()) hidden_detail += fmt::format("{} hides {}; ", name, fmt_roots(h));
    };
    for (int i = 0; i < G.nz(); ++i)
        for (int j = 0; j < G.nw(); ++j) note(fmt::format("G11[{}][{}]", i, j), G.G11[i][j]);
    for (int i = 0; i < G.nz(); ++i) note(fmt::format("G12[{}]", i), G.G12[i]);
    for (int j = 0; j < G.nw(); ++j) note(fmt::format("G21[{}]", j), G.G21[j]);
    note("G22", G.G22);
    rep.items.push_back({"no unstable hidden modes", hidden_detail.empty(),
                         hidden_detail.empty() ? "none" : hidden_detail});

    const PlantRealization P = realize(G);
    std::string sd;
    for (const cplx& l : eigenvalues(P.A)) {
        if (std::abs(l) < 1.0) continue;
        if (!pbh_rank(P.A, P.B2, l, true)) sd += fmt::format("mode {} not reachable from u; ", fmt_roots({l}));
        if (!pbh_rank(P.A, P.C2, l, false)) sd += fmt::format("mode {} not visible in y; ", fmt_roots({l}));
    }
    rep.items.push_back({"stabilizable and detectable through (u, y)", sd.empty(), sd.empty() ? "ok" : sd});
    return rep;
}

GeneralizedPlant delay_augment(const GeneralizedPlant& G, int h) {
    if (h < 0) throw std::invalid_argument("negative delay");
    GeneralizedPlant Ga = G;
    const RationalTransfer d = delay_tf(h);
    for (auto& g : Ga.G12) g = RationalTransfer(g * d);
    Ga.G22 = G.G22 * d;
    return Ga;
}

LinearScheme::LinearScheme(StateSpace encoder, StateSpace decoder, double sigma_eta_sq)
    : enc_(std::move(encoder)), dec_(std::move(decoder)), s_(sigma_eta_sq) {
    if (enc_.inputs() != 2 || enc_.outputs() != 1)
        throw DimensionError("encoder must map (r(k-1), y(k)) to t(k)");
    if (dec_.inputs() != 1 || dec_.outputs() != 1) throw DimensionError("decoder must be SISO");
    if (!(s_ > 0.0) || !std::isfinite(s_)) throw std::invalid_argument("sigma_eta_sq must be positive");
}

LinearScheme LinearScheme::from_transfer(const RationalTransfer& Br, const RationalTransfer& By,
                                         const RationalTransfer& J, double sigma_eta_sq) {
    const StateSpace a = to_state_space(Br), b = to_state_space(By);
    const StateSpace both = append(a, b);
    Mat C(1, both.order()), D(1, 2);
    C << a.C, b.C;
    D << a.D, b.D;
    StateSpace enc(both.A, both.B, C, D);
    return LinearScheme(minimal_realization(enc), to_state_space(J), sigma_eta_sq);
}

LinearScheme LinearScheme::with_sigma(double s) const { return LinearScheme(enc_, dec_, s); }

RationalTransfer LinearScheme::Br() const { return to_transfer(minimal_realization(enc_.select({0}, {0}))); }
RationalTransfer LinearScheme::By() const { return to_transfer(minimal_realization(enc_.select({0}, {1}))); }
RationalTransfer LinearScheme::J() const { return to_transfer(minimal_realization(dec_)); }

}  // namespace netrate
