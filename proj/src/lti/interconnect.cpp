#include "netrate/lti.hpp"

namespace netrate {

int Interconnect::add_block(const StateSpace& s) {
    blocks_.push_back(s);
    feeds_.emplace_back(s.inputs());
    return static_cast<int>(blocks_.size()) - 1;
}

int Interconnect::add_input(int width) {
    input_widths_.push_back(width);
    return static_cast<int>(input_widths_.size()) - 1;
}

void Interconnect::feed_from_block(int b, int port, int src_block, int src_port, double gain) {
    feeds_.at(b).at(port).push_back({true, src_block, src_port, gain});
}

void Interconnect::feed_from_input(int b, int port, int ext, int ext_port, double gain) {
    feeds_.at(b).at(port).push_back({false, ext, ext_port, gain});
}

int Interconnect::add_output() {
    outputs_.emplace_back();
    return static_cast<int>(outputs_.size()) - 1;
}

void Interconnect::output_from_block(int out, int src_block, int src_port, double gain) {
    outputs_.at(out).push_back({true, src_block, src_port, gain});
}

void Interconnect::output_from_input(int out, int ext, int ext_port, double gain) {
    outputs_.at(out).push_back({false, ext, ext_port, gain});
}

StateSpace Interconnect::build() const {
    std::vector<int> xoff, uoff, yoff, eoff;
    int nx = 0, nu = 0, ny = 0, ne = 0;
    for (const auto& b : blocks_) {
        xoff.push_back(nx);
        uoff.push_back(nu);
        yoff.push_back(ny);
        nx += b.order();
        nu += b.inputs();
        ny += b.outputs();
    }
    for (int w : input_widths_) {
        eoff.push_back(ne);
        ne += w;
    }
    Mat A = Mat::Zero(nx, nx), B = Mat::Zero(nx, nu), C = Mat::Zero(ny, nx), D = Mat::Zero(ny, nu);
    for (size_t k = 0; k < blocks_.size(); ++k) {
        const auto& b = blocks_[k];
        A.block(xoff[k], xoff[k], b.order(), b.order()) = b.A;
        B.block(xoff[k], uoff[k], b.order(), b.inputs()) = b.B;
        C.block(yoff[k], xoff[k], b.outputs(), b.order()) = b.C;
        D.block(yoff[k], uoff[k], b.outputs(), b.inputs()) = b.D;
    }
    // U = K Y + E W
    Mat K = Mat::Zero(nu, ny), E = Mat::Zero(nu, ne);
    for (size_t k = 0; k < blocks_.size(); ++k)
        for (size_t p = 0; p < feeds_[k].size(); ++p)
            for (const Term& t : feeds_[k][p]) {
                if (t.from_block)
                    K(uoff[k] + p, yoff[t.src] + t.port) += t.gain;
                else
                    E(uoff[k] + p, eoff[t.src] + t.port) += t.gain;
            }
    const Mat IKD = Mat::Identity(nu, nu) - K * D;
    Eigen::FullPivLU<Mat> lu(IKD);
    if (nu > 0 && (!lu.isInvertible() || lu.rcond() < 1e-12))
        throw IllPosed("interconnection has an algebraic loop (I - K D singular)");
    const Mat Ux = nu > 0 ? Mat(lu.solve(K * C)) : Mat::Zero(0, nx);
    const Mat Uw = nu > 0 ? Mat(lu.solve(E)) : Mat::Zero(0, ne);

    const int no = static_cast<int>(outputs_.size());
    Mat Ko = Mat::Zero(no, ny), Eo = Mat::Zero(no, ne);
    for (int o = 0; o < no; ++o)
        for (const Term& t : outputs_[o]) {
            if (t.from_block)
                Ko(o, yoff[t.src] + t.port) += t.gain;
            else
                Eo(o, eoff[t.src] + t.port) += t.gain;
        }
    const Mat Ycx = C + D * Ux, Ycw = D * Uw;
    return StateSpace(A + B * Ux, B * Uw, Ko * Ycx, Ko * Ycw + Eo);
}

}  // namespace netrate
