#include "netrate/lti.hpp"

#include <cmath>

namespace netrate {

// Smith doubling: X = sum_k A^k Q A'^k.
Mat dlyap(const Mat& A, const Mat& Q) {
    const int n = static_cast<int>(A.rows());
    if (n == 0) return Mat(0, 0);
    if (spectral_radius(A) >= 1.0) throw UnstableSystem("dlyap: A is not Schur stable");
    Mat X = Q, Ak = A;
    for (int it = 0; it < 80; ++it) {
        const Mat inc = Ak * X * Ak.transpose();
        X += inc;
        if (inc.cwiseAbs().maxCoeff() <= 1e-17 * std::max(1.0, X.cwiseAbs().maxCoeff())) break;
        Ak = Ak * Ak;
    }
    return 0.5 * (X + X.transpose());
}

DareResult dare(const Mat& A, const Mat& B, const Mat& Q, const Mat& R, const Mat& S, double tol,
                int max_iter) {
    const int n = static_cast<int>(A.rows());
    // starting from Q alone can make R + B'PB singular on the first step
    Mat P = Q + Mat::Identity(n, n);
    DareResult out;
    for (int it = 1; it <= max_iter; ++it) {
        const Mat G = R + B.transpose() * P * B;
        const Mat H = B.transpose() * P * A + S.transpose();
        Eigen::LDLT<Mat> ldlt(G);
        if (ldlt.info() != Eigen::Success) throw NumericalError("dare: singular R + B'PB");
        Mat Pn = A.transpose() * P * A + Q - H.transpose() * ldlt.solve(H);
        Pn = 0.5 * (Pn + Pn.transpose());
        if (!Pn.allFinite()) throw NumericalError("dare: iteration diverged");
        const double diff = (Pn - P).cwiseAbs().maxCoeff();
        P = std::move(Pn);
        if (diff <= tol * std::max(1.0, P.cwiseAbs().maxCoeff())) {
            out.iterations = it;
            const Mat G2 = R + B.transpose() * P * B;
            out.K = -G2.ldlt().solve(B.transpose() * P * A + S.transpose());
            out.P = P;
            return out;
        }
    }
    throw NumericalError("dare: no convergence within the iteration limit");
}

}  // namespace netrate
