#include "netrate/lti.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace netrate {

double h2_norm_sq(const StateSpace& s) {
    double d = s.D.squaredNorm();
    if (s.order() == 0) return d;
    const Mat P = dlyap(s.A, s.B * s.B.transpose());
    return (s.C * P * s.C.transpose()).trace() + d;
}

double h2_norm_sq(const RationalTransfer& g) {
    if (!is_stable(g)) throw UnstableSystem("H2 norm of an unstable transfer function");
    return h2_norm_sq(to_state_space(g));
}

CMat freq_response(const StateSpace& s, double w) {
    const cplx z = std::polar(1.0, w);
    if (s.order() == 0) return s.D.cast<cplx>();
    const CMat M = z * CMat::Identity(s.order(), s.order()) - s.A.cast<cplx>();
    Eigen::PartialPivLU<CMat> lu(M);
    const double rc = lu.rcond();
    if (!(rc > 1e-14)) throw Singularity("frequency response evaluated at a pole");
    return s.C.cast<cplx>() * lu.solve(s.B.cast<cplx>()) + s.D.cast<cplx>();
}

cplx freq_response(const RationalTransfer& g, double w) {
    const cplx z = std::polar(1.0, w);
    const cplx zi = 1.0 / z;
    cplx d = 0.0;
    for (size_t i = g.den().size(); i-- > 0;) d = d * zi + g.den()[i];
    if (std::abs(d) < 1e-14) throw Singularity("frequency response evaluated at a pole");
    return g(z);
}

FrequencyEvaluator::FrequencyEvaluator(const StateSpace& s) : D_(s.D) {
    if (s.order() == 0) {
        H_ = Mat(0, 0);
        Bt_ = Mat(0, s.inputs());
        Ct_ = Mat(s.outputs(), 0);
        return;
    }
    Eigen::HessenbergDecomposition<Mat> hd(s.A);
    const Mat Q = hd.matrixQ();
    H_ = hd.matrixH();
    Bt_ = Q.transpose() * s.B;
    Ct_ = s.C * Q;
}

CMat FrequencyEvaluator::operator()(double w) const {
    const int n = static_cast<int>(H_.rows());
    if (n == 0) return D_.cast<cplx>();
    const cplx z = std::polar(1.0, w);
    CMat M = -H_.cast<cplx>();
    M.diagonal().array() += z;
    CMat X = Bt_.cast<cplx>();
    const double scale = std::max(1.0, H_.cwiseAbs().maxCoeff());
    // upper Hessenberg elimination with adjacent-row pivoting
    for (int k = 0; k < n - 1; ++k) {
        if (std::abs(M(k + 1, k)) > std::abs(M(k, k))) {
            M.row(k).swap(M.row(k + 1));
            X.row(k).swap(X.row(k + 1));
        }
        if (std::abs(M(k, k)) < 1e-14 * scale) throw Singularity("frequency response at a pole");
        const cplx f = M(k + 1, k) / M(k, k);
        if (f != cplx(0.0)) {
            M.row(k + 1).tail(n - k) -= f * M.row(k).tail(n - k);
            X.row(k + 1) -= f * X.row(k);
        }
    }
    if (std::abs(M(n - 1, n - 1)) < 1e-14 * scale) throw Singularity("frequency response at a pole");
    for (int k = n - 1; k >= 0; --k) {
        if (k + 1 < n) X.row(k) -= M.row(k).segment(k + 1, n - k - 1) * X.bottomRows(n - k - 1);
        X.row(k) /= M(k, k);
    }
    return Ct_.cast<cplx>() * X + D_.cast<cplx>();
}

std::vector<double> spectral_grid(int intervals) {
    std::vector<double> w(intervals + 1);
    for (int i = 0; i <= intervals; ++i) w[i] = -std::numbers::pi + 2.0 * std::numbers::pi * i / intervals;
    return w;
}

double log_spectral_integral(const std::vector<double>& S, double sigma2) {
    if (S.size() < 2) throw std::domain_error("spectral density needs at least two grid points");
    if (!(sigma2 > 0.0)) throw std::domain_error("reference variance must be positive");
    const size_t n = S.size() - 1;
    double acc = 0.0;
    for (size_t i = 0; i <= n; ++i) {
        if (!(S[i] > 0.0)) throw std::domain_error("nonpositive spectral density sample");
        const double v = std::log(S[i] / sigma2);
        acc += (i == 0 || i == n) ? 0.5 * v : v;
    }
    const double dw = 2.0 * std::numbers::pi / static_cast<double>(n);
    return acc * dw / (4.0 * std::numbers::pi);
}

}  // namespace netrate
