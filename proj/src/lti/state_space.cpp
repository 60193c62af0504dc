#include "netrate/lti.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace netrate {

StateSpace::StateSpace(Mat a, Mat b, Mat c, Mat d)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
    const auto n = A.rows();
    if (A.cols() != n || B.rows() != n || C.cols() != n || C.rows() != D.rows() ||
        B.cols() != D.cols())
        throw DimensionError("inconsistent state-space dimensions");
}

StateSpace StateSpace::gain(const Mat& d) {
    return StateSpace(Mat(0, 0), Mat(0, d.cols()), Mat(d.rows(), 0), d);
}

StateSpace StateSpace::select(const std::vector<int>& out, const std::vector<int>& in) const {
    Mat b(order(), in.size()), c(out.size(), order()), d(out.size(), in.size());
    for (size_t j = 0; j < in.size(); ++j) b.col(j) = B.col(in[j]);
    for (size_t i = 0; i < out.size(); ++i) {
        c.row(i) = C.row(out[i]);
        for (size_t j = 0; j < in.size(); ++j) d(i, j) = D(out[i], in[j]);
    }
    return StateSpace(A, b, c, d);
}

std::vector<cplx> eigenvalues(const Mat& A) {
    if (A.rows() == 0) return {};
    Eigen::EigenSolver<Mat> es(A, false);
    if (es.info() != Eigen::Success) throw NumericalError("eigenvalue computation failed");
    std::vector<cplx> out(es.eigenvalues().data(), es.eigenvalues().data() + A.rows());
    sort_roots(out);
    return out;
}

double spectral_radius(const Mat& A) {
    double r = 0.0;
    for (const cplx& l : eigenvalues(A)) r = std::max(r, std::abs(l));
    return r;
}

bool is_stable(const StateSpace& s) { return s.order() == 0 || spectral_radius(s.A) < 1.0; }

bool is_strictly_proper(const StateSpace& s) { return s.D.isZero(0.0); }

StateSpace to_state_space(const RationalTransfer& g) {
    const int n = g.order();
    const auto nz = g.num_z();
    const auto dz = g.den_z();
    const double b0 = nz[0];
    Mat A = Mat::Zero(n, n), B = Mat::Zero(n, 1), C(1, n), D(1, 1);
    for (int j = 0; j < n; ++j) {
        A(0, j) = -dz[j + 1];
        C(0, j) = nz[j + 1] - b0 * dz[j + 1];
    }
    for (int i = 1; i < n; ++i) A(i, i - 1) = 1.0;
    if (n > 0) B(0, 0) = 1.0;
    D(0, 0) = b0;
    return StateSpace(A, B, C, D);
}

RationalTransfer to_transfer(const StateSpace& s, int out, int in) {
    const Vec b = s.B.col(in);
    const Eigen::RowVectorXd c = s.C.row(out);
    const double d = s.D(out, in);
    const auto q = poly_from_roots(eigenvalues(s.A));
    const auto p = poly_from_roots(eigenvalues(s.A - b * c));
    std::vector<double> num(q.size());
    for (size_t i = 0; i < q.size(); ++i) num[i] = p[i] - q[i] + d * q[i];
    return cancel_common(RationalTransfer(num, q));
}

StateSpace append(const StateSpace& a, const StateSpace& b) {
    const int n = a.order() + b.order();
    Mat A = Mat::Zero(n, n), B = Mat::Zero(n, a.inputs() + b.inputs()),
        C = Mat::Zero(a.outputs() + b.outputs(), n),
        D = Mat::Zero(a.outputs() + b.outputs(), a.inputs() + b.inputs());
    A.topLeftCorner(a.order(), a.order()) = a.A;
    A.bottomRightCorner(b.order(), b.order()) = b.A;
    B.topLeftCorner(a.order(), a.inputs()) = a.B;
    B.bottomRightCorner(b.order(), b.inputs()) = b.B;
    C.topLeftCorner(a.outputs(), a.order()) = a.C;
    C.bottomRightCorner(b.outputs(), b.order()) = b.C;
    D.topLeftCorner(a.outputs(), a.inputs()) = a.D;
    D.bottomRightCorner(b.outputs(), b.inputs()) = b.D;
    return StateSpace(A, B, C, D);
}

StateSpace feedback(const StateSpace& g, const StateSpace& k, double sign) {
    if (g.outputs() != k.inputs() || k.outputs() != g.inputs())
        throw DimensionError("feedback dimension mismatch");
    Interconnect ic;
    const int bg = ic.add_block(g), bk = ic.add_block(k);
    const int ext = ic.add_input(g.inputs());
    for (int i = 0; i < g.inputs(); ++i) {
        ic.feed_from_input(bg, i, ext, i);
        ic.feed_from_block(bg, i, bk, i, sign);
    }
    for (int i = 0; i < g.outputs(); ++i) ic.feed_from_block(bk, i, bg, i);
    for (int i = 0; i < g.outputs(); ++i) ic.output_from_block(ic.add_output(), bg, i);
    return ic.build();
}

StateSpace connect(Connection kind, const StateSpace& a, const StateSpace& b) {
    switch (kind) {
        case Connection::series: {
            if (a.outputs() != b.inputs()) throw DimensionError("series dimension mismatch");
            const int n = a.order() + b.order();
            Mat A = Mat::Zero(n, n);
            A.topLeftCorner(a.order(), a.order()) = a.A;
            A.bottomLeftCorner(b.order(), a.order()) = b.B * a.C;
            A.bottomRightCorner(b.order(), b.order()) = b.A;
            Mat B(n, a.inputs());
            B << a.B, b.B * a.D;
            Mat C(b.outputs(), n);
            C << b.D * a.C, b.C;
            return StateSpace(A, B, C, b.D * a.D);
        }
        case Connection::parallel: {
            if (a.inputs() != b.inputs() || a.outputs() != b.outputs())
                throw DimensionError("parallel dimension mismatch");
            StateSpace s = append(a, b);
            Mat B(s.order(), a.inputs());
            B << a.B, b.B;
            Mat C(a.outputs(), s.order());
            C << a.C, b.C;
            return StateSpace(s.A, B, C, a.D + b.D);
        }
        case Connection::feedback:
            return feedback(a, b, -1.0);
    }
    return {};
}

StateSpace delay_ss(int h) {
    if (h < 0) throw std::invalid_argument("negative delay");
    if (h == 0) return StateSpace::gain(Mat::Identity(1, 1));
    Mat A = Mat::Zero(h, h), B = Mat::Zero(h, 1), C = Mat::Zero(1, h), D = Mat::Zero(1, 1);
    for (int i = 1; i < h; ++i) A(i, i - 1) = 1.0;
    B(0, 0) = 1.0;
    C(0, h - 1) = 1.0;
    return StateSpace(A, B, C, D);
}

namespace {

// Orthonormal basis of the Krylov space spanned by (A, B), built block by block
// with re-orthogonalisation; a candidate direction is dropped when its residual
// falls below tol * scale.
Mat krylov_basis(const Mat& A, const Mat& B, double tol) {
    const int n = static_cast<int>(A.rows());
    const double scale = std::max({1.0, A.norm(), B.norm()});
    Mat V(n, 0);
    Mat block = B;
    while (block.cols() > 0 && V.cols() < n) {
        Mat added(n, 0);
        for (int j = 0; j < block.cols(); ++j) {
            Vec v = block.col(j);
            for (int pass = 0; pass < 2; ++pass) {
                if (V.cols() > 0) v -= V * (V.transpose() * v);
                if (added.cols() > 0) v -= added * (added.transpose() * v);
            }
            const double nv = v.norm();
            if (nv > tol * scale) {
                added.conservativeResize(n, added.cols() + 1);
                added.col(added.cols() - 1) = v / nv;
            }
        }
        if (added.cols() == 0) break;
        V.conservativeResize(n, V.cols() + added.cols());
        V.rightCols(added.cols()) = added;
        block = A * added;
    }
    return V;
}

}  // namespace

StateSpace controllable_part(const StateSpace& s, double tol) {
    if (s.order() == 0) return s;
    const Mat V = krylov_basis(s.A, s.B, tol);
    return StateSpace(V.transpose() * s.A * V, V.transpose() * s.B, s.C * V, s.D);
}

StateSpace observable_part(const StateSpace& s, double tol) {
    if (s.order() == 0) return s;
    const Mat V = krylov_basis(s.A.transpose(), s.C.transpose(), tol);
    return StateSpace(V.transpose() * s.A * V, V.transpose() * s.B, s.C * V, s.D);
}

StateSpace minimal_realization(const StateSpace& s, double tol) {
    return observable_part(controllable_part(s, tol), tol);
}

TransferMatrix::TransferMatrix(StateSpace ss, std::vector<int> row_sizes, std::vector<int> col_sizes)
    : ss_(std::move(ss)), rows_(std::move(row_sizes)), cols_(std::move(col_sizes)) {
    int r = 0, c = 0;
    for (int v : rows_) r += v;
    for (int v : cols_) c += v;
    if (r != ss_.outputs() || c != ss_.inputs())
        throw DimensionError("block sizes do not match realisation");
}

TransferMatrix TransferMatrix::from_entries(const std::vector<std::vector<RationalTransfer>>& g) {
    if (g.empty() || g[0].empty()) throw DimensionError("empty transfer matrix");
    const int p = static_cast<int>(g.size()), q = static_cast<int>(g[0].size());
    StateSpace all = StateSpace::gain(Mat(0, 0));
    for (const auto& row : g) {
        if (static_cast<int>(row.size()) != q) throw DimensionError("ragged transfer matrix");
        for (const auto& e : row) all = append(all, to_state_space(e));
    }
    // wire entry (i, j) from input j to output i
    Mat B = Mat::Zero(all.order(), q), C = Mat::Zero(p, all.order()), D = Mat::Zero(p, q);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < q; ++j) {
            const int k = i * q + j;
            B.col(j) += all.B.col(k);
            C.row(i) += all.C.row(k);
            D(i, j) = all.D(k, k);
        }
    StateSpace s = minimal_realization(StateSpace(all.A, B, C, D));
    return TransferMatrix(s, std::vector<int>(p, 1), std::vector<int>(q, 1));
}

StateSpace TransferMatrix::block(int i, int j) const {
    int r0 = 0, c0 = 0;
    for (int k = 0; k < i; ++k) r0 += rows_[k];
    for (int k = 0; k < j; ++k) c0 += cols_[k];
    std::vector<int> out, in;
    for (int k = 0; k < rows_[i]; ++k) out.push_back(r0 + k);
    for (int k = 0; k < cols_[j]; ++k) in.push_back(c0 + k);
    return ss_.select(out, in);
}

StateSpace TransferMatrix::entry(int row, int col) const { return ss_.select({row}, {col}); }

RationalTransfer TransferMatrix::entry_tf(int row, int col) const {
    return to_transfer(minimal_realization(entry(row, col)));
}

}  // namespace netrate
