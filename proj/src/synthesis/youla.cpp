#include "netrate/synthesis.hpp"
#include "probe.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace netrate {

namespace {

// Impulse response stored row-per-lag, entry (i, j) in column i * q + j.
struct Seq {
    int p = 1, q = 1;
    Mat v;  // L x (p q)
    int len() const { return static_cast<int>(v.rows()); }
};

Seq impulse(const StateSpace& s, int L) {
    Seq out{s.outputs(), s.inputs(), Mat::Zero(L, s.outputs() * s.inputs())};
    auto put = [&](int t, const Mat& M) {
        for (int i = 0; i < out.p; ++i)
            for (int j = 0; j < out.q; ++j) out.v(t, i * out.q + j) = M(i, j);
    };
    put(0, s.D);
    Mat x = s.B;
    for (int t = 1; t < L; ++t) {
        put(t, s.C * x);
        x = s.A * x;
    }
    return out;
}

// scalar FIR filter applied to every entry
Seq filter(const Vec& f, const Seq& s) {
    Seq out{s.p, s.q, Mat::Zero(s.len(), s.v.cols())};
    for (int j = 0; j < f.size(); ++j)
        if (f(j) != 0.0) out.v.bottomRows(s.len() - j) += f(j) * s.v.topRows(s.len() - j);
    return out;
}

// sum_t <a[t + lag], b[t]>
double xc(const Seq& a, const Seq& b, int lag) {
    const int L = a.len();
    if (lag >= 0) return (a.v.bottomRows(L - lag).array() * b.v.topRows(L - lag).array()).sum();
    return (a.v.topRows(L + lag).array() * b.v.bottomRows(L + lag).array()).sum();
}

// ||base + sum_j q_j z^-j W||^2 = c + 2 g'q + q'Hq, taps j = 0..N-1
struct Quad {
    double c;
    Vec g;
    Mat H;
    double at(const Vec& x) const { return c + 2.0 * g.dot(x) + x.dot(H * x); }
    Quad tail() const { return {c, g.tail(g.size() - 1), H.bottomRightCorner(H.rows() - 1, H.cols() - 1)}; }
};

Quad quad(const Seq& base, const Seq& W, int N) {
    Quad Q{xc(base, base, 0), Vec(N), Mat(N, N)};
    Vec r(N);
    for (int d = 0; d < N; ++d) r(d) = xc(W, W, d);
    for (int j = 0; j < N; ++j) {
        Q.g(j) = xc(base, W, j);
        for (int l = 0; l < N; ++l) Q.H(j, l) = r(std::abs(j - l));
    }
    return Q;
}

struct Pieces {
    PlantRealization P;
    Mat F, L;
    int N = 0, len = 0;
    Seq T3, Ts, Tzv, Tue, Tze, Teps, U0, Z0, Wu, Wz;
};

Pieces make_pieces(const PlantRealization& P, const Mat& F, const Mat& L, int N, int nphi) {
    Pieces d;
    d.P = P;
    d.F = F;
    d.L = L;
    d.N = N;
    const Mat AF = P.A + P.B2 * F, AL = P.A - L * P.C2;
    const Mat BL = P.B1 - L * P.D21, CF = P.C1 + P.D12 * F;
    const double rho = std::max(spectral_radius(AF), spectral_radius(AL));
    int tail = 0;
    if (rho > 0) tail = static_cast<int>(std::ceil(std::log(1e-17) / std::log(std::min(rho, 0.9999))));
    d.len = std::clamp(2 * N + nphi + tail, 64, 6000);
    const StateSpace T3(AL, BL, P.C2, P.D21), Ts(AF, P.B2, F, Mat::Identity(1, 1)), Tzv(AF, P.B2, CF, P.D12),
        Tue(AF, L, F, Mat::Zero(1, 1)), Tze(AF, L, CF, Mat::Zero(P.nz(), 1)), Teps(AL, BL, P.C1, P.D11);
    const int n = d.len;
    d.T3 = impulse(T3, n);
    d.Ts = impulse(Ts, n);
    d.Tzv = impulse(Tzv, n);
    d.Tue = impulse(Tue, n);
    d.Tze = impulse(Tze, n);
    d.Teps = impulse(Teps, n);
    d.U0 = impulse(connect(Connection::series, T3, Tue), n);
    d.Wu = impulse(connect(Connection::series, T3, Ts), n);
    d.Wz = impulse(connect(Connection::series, T3, Tzv), n);
    d.Z0 = impulse(connect(Connection::parallel, Teps, connect(Connection::series, T3, Tze)), n);
    return d;
}

struct FixedSolution {
    double lower = 0, upper = 0, lambda = 0, s = 0;
    Vec qy, qe;  // qe(0) = 1
    double a = 0, b = 0, c = 0, e = 0;
};

Vec spd_solve(const Mat& H, const Vec& g) {
    Eigen::LDLT<Mat> f(H);
    if (f.info() != Eigen::Success) throw NumericalError("Gram matrix factorisation failed");
    return f.solve(g);
}

FixedSolution solve_fixed(const Pieces& d, const Vec& phi, double D, double lam0, double tol) {
    const int N = d.N;
    const Quad A = quad(filter(phi, d.U0), filter(phi, d.Wu), N);
    const Quad B = quad(d.Z0, d.Wz, N);
    const Seq fs = filter(phi, d.Ts);
    const Quad C = quad(fs, fs, N).tail();
    const Quad E = quad(d.Tzv, d.Tzv, N).tail();
    const double scale = std::max(1.0, B.H.diagonal().maxCoeff());
    const Mat I = 1e-15 * scale * Mat::Identity(N, N);

    struct K {
        double v, a, b;
        Vec q;
    };
    auto Kf = [&](double l) {
        const double w = 1.0 / (1.0 + l);
        Vec q = -spd_solve(w * (B.H + l * A.H) + I, w * (B.g + l * A.g));
        const double a = A.at(q), b = B.at(q);
        return K{b + l * a, a, b, q};
    };
    struct M {
        double m, c, e;
        Vec q;
    };
    auto Mf = [&](double l) {
        Vec q = N > 1 ? Vec(-spd_solve(l * C.H + E.H + I.topLeftCorner(N - 1, N - 1), l * C.g + E.g)) : Vec(0);
        const double c = N > 1 ? C.at(q) : C.c, e = N > 1 ? E.at(q) : E.c;
        return M{c + e / l, c, e, q};
    };

    double lo = std::log(lam0) - 1.0, hi = std::log(lam0) + 1.0;
    K klo = Kf(std::exp(lo));
    while (klo.v > D) {
        lo -= 2.0;
        if (lo < -70.0) throw InfeasiblePerformance("no feasible weight at this truncation order");
        klo = Kf(std::exp(lo));
    }
    while (Kf(std::exp(hi)).v < D) {
        hi += 2.0;
        if (hi > 70.0) throw SynthesisError("variance target never binds");
    }
    M mlo = Mf(std::exp(lo)), mhi = Mf(std::exp(hi));
    for (int it = 0; it < 400; ++it) {
        if ((mlo.m - mhi.m) <= tol * std::max(mhi.m - 1.0, 1.0) || hi - lo < 1e-15) break;
        const double mid = 0.5 * (lo + hi);
        K km = Kf(std::exp(mid));
        if (km.v <= D) {
            lo = mid;
            klo = km;
            mlo = Mf(std::exp(mid));
        } else {
            hi = mid;
            mhi = Mf(std::exp(mid));
        }
    }
    const double lam = std::exp(lo);
    FixedSolution out;
    out.lower = mhi.m - 1.0;
    out.upper = mlo.m - 1.0;
    out.lambda = lam;
    out.a = klo.a;
    out.b = klo.b;
    out.c = mlo.c;
    out.e = mlo.e;
    out.s = lam * klo.a / mlo.e;
    out.qy = klo.q;
    out.qe = Vec::Zero(N);
    out.qe(0) = 1.0;
    out.qe.tail(N - 1) = mlo.q;
    return out;
}

struct Levinson {
    Vec a;
    double err;
};
Levinson levinson(const Vec& r, int p) {
    Vec a = Vec::Zero(p + 1);
    a(0) = 1.0;
    double E = r(0);
    for (int k = 1; k <= p; ++k) {
        double acc = r(k);
        for (int j = 1; j < k; ++j) acc += a(j) * r(k - j);
        const double kk = -acc / E;
        Vec prev = a;
        for (int j = 1; j <= k; ++j) a(j) = prev(j) + kk * prev(k - j);
        E *= (1.0 - kk * kk);
        if (!(E > 0)) throw NumericalError("autocorrelation is not positive definite");
    }
    return {a, E};
}

// u autocorrelation under the scheme (noise part scaled by s)
Vec u_autocorr(const Pieces& d, const FixedSolution& sol, int lags) {
    const Seq Uw = [&] {
        Seq w = d.Wu;
        Seq acc = d.U0;
        for (int j = 0; j < sol.qy.size(); ++j)
            if (sol.qy(j) != 0.0) acc.v.bottomRows(w.len() - j) += sol.qy(j) * w.v.topRows(w.len() - j);
        return acc;
    }();
    const Seq V = filter(sol.qe, d.Ts);
    Vec r(lags + 1);
    for (int k = 0; k <= lags; ++k) r(k) = xc(Uw, Uw, k) + sol.s * xc(V, V, k);
    return r;
}

// Encoder state: xh(k-1), e(k-1..k-N), eta(k-2..k-N-1), u(k-2..k-1-np), t(k-1).
StateSpace build_encoder(const Pieces& d, const Vec& phi, const FixedSolution& sol) {
    const PlantRealization& P = d.P;
    const int n = P.nx(), N = d.N, np = static_cast<int>(phi.size()) - 1;
    const int oe = n, oh = oe + N, ou = oh + N, ot = ou + np, nx = ot + 1;
    auto step = [&](const Vec& x, const Vec& in, Vec& xn, Vec& y) {
        const double a = in(0), yk = in(1);
        double u1 = a;
        for (int j = 1; j <= np; ++j) u1 -= phi(j) * x(ou + j - 1);
        const double eta1 = a - x(ot);
        const Vec xh = P.A * x.head(n) + P.B2 * u1 + d.L * x(oe);
        const double e = yk - (P.C2 * xh)(0);
        auto eta_at = [&](int j) { return j == 1 ? eta1 : x(oh + j - 2); };
        auto u_at = [&](int j) { return j == 1 ? u1 : x(ou + j - 2); };
        double t = (d.F * xh)(0) + sol.qy(0) * e;
        for (int j = 1; j < N; ++j) t += sol.qy(j) * x(oe + j - 1) + sol.qe(j) * eta_at(j);
        for (int j = 1; j <= np; ++j) t += phi(j) * u_at(j);
        xn.setZero(nx);
        xn.head(n) = xh;
        xn(oe) = e;
        xn(oh) = eta1;
        for (int j = 1; j < N; ++j) {
            xn(oe + j) = x(oe + j - 1);
            xn(oh + j) = x(oh + j - 1);
        }
        if (np > 0) xn(ou) = u1;
        for (int j = 1; j < np; ++j) xn(ou + j) = x(ou + j - 1);
        xn(ot) = t;
        y.resize(1);
        y(0) = t;
    };
    return detail::probe_linear(nx, 2, 1, step);
}

StateSpace all_pole(const Vec& phi) {
    std::vector<double> den(phi.data(), phi.data() + phi.size());
    return to_state_space(RationalTransfer({1.0}, den));
}

struct Candidate {
    FixedSolution sol;
    Vec phi;
    double whiteness = 0;
};

}  // namespace

PhiResult phi_prime(const GeneralizedPlant& G, int h, double D, const PhiOptions& opt) {
    const double dinf = d_inf(G, h);
    if (!(D > dinf)) throw InfeasiblePerformance("target variance at or below the performance floor");
    const UnitDecoderResult unit = phi_prime_unit_decoder(G, h, D);

    PhiResult res;
    res.unit_decoder_value = unit.value;
    if (unit.value == 0.0) {
        // open loop already meets the target: send nothing
        res.scheme = LinearScheme(StateSpace::gain(Mat::Zero(1, 2)), StateSpace::gain(Mat::Zero(1, 1)), 1.0);
        res.lambda = unit.lambda;
        return res;
    }

    const PlantRealization P = realize(delay_augment(G, h));
    const Mat& F = unit.point.K.F;
    const Mat& L = unit.point.K.L;
    Vec phi = Vec::Ones(1);
    double lam0 = unit.lambda;
    double prev_order_value = NAN;
    Candidate best;
    int order_used = 0;
    for (int N = std::max(opt.fir_order, 2); N <= std::max(opt.max_fir_order, opt.fir_order); N *= 2) {
        const Pieces d = make_pieces(P, F, L, N, N);
        Candidate cur;
        double last = INFINITY;
        int iters = 0;
        Vec phi_run = phi;
        if (phi_run.size() > N + 1) phi_run.conservativeResize(N + 1);
        for (int it = 0; it < std::max(opt.max_decoder_iterations, 1); ++it) {
            FixedSolution sol = solve_fixed(d, phi_run, D, lam0, opt.bracket_tol);
            lam0 = sol.lambda;
            ++iters;
            const Vec r = u_autocorr(d, sol, N);
            const Levinson lev = levinson(r, N);
            double varr = 0;
            for (int i = 0; i < phi_run.size(); ++i)
                for (int j = 0; j < phi_run.size(); ++j) varr += phi_run(i) * phi_run(j) * r(std::abs(i - j));
            if (sol.upper < last || it == 0) {
                cur.sol = sol;
                cur.phi = phi_run;
                cur.whiteness = 0.5 * std::log2(varr / lev.err);
            }
            if (!opt.adapt_decoder) break;
            if (it > 0 && last - sol.upper <= opt.decoder_tol * std::max(1.0, sol.upper)) break;
            last = std::min(last, sol.upper);
            phi_run = lev.a;
        }
        best = cur;
        phi = cur.phi;
        order_used = N;
        res.decoder_iterations += iters;
        const double v = cur.sol.upper;
        if (!std::isnan(prev_order_value)) {
            res.truncation_gap = std::abs(v - prev_order_value) / std::max(v, 1.0);
            if (res.truncation_gap <= opt.truncation_tol) break;
        } else {
            res.truncation_gap = INFINITY;
        }
        prev_order_value = v;
        if (2 * N > opt.max_fir_order) break;
    }

    const Pieces d = make_pieces(P, F, L, order_used, order_used);
    res.value = best.sol.upper;
    res.lower = best.sol.lower;
    res.upper = best.sol.upper;
    res.lambda = best.sol.lambda;
    res.fir_order = order_used;
    res.whiteness_bits = best.whiteness;
    res.scheme = LinearScheme(build_encoder(d, best.phi, best.sol), all_pole(best.phi), best.sol.s);
    return res;
}

}  // namespace netrate
