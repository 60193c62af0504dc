#pragma once

#include "netrate/lti.hpp"

#include <functional>

namespace netrate::detail {

// Recovers (A, B, C, D) of a linear step map by feeding unit vectors.
using StepMap = std::function<void(const Vec& x, const Vec& u, Vec& x_next, Vec& y)>;

inline StateSpace probe_linear(int nx, int nu, int ny, const StepMap& step) {
    Mat A(nx, nx), B(nx, nu), C(ny, nx), D(ny, nu);
    Vec xn(nx), y(ny);
    for (int i = 0; i < nx; ++i) {
        step(Vec::Unit(nx, i), Vec::Zero(nu), xn, y);
        A.col(i) = xn;
        C.col(i) = y;
    }
    for (int j = 0; j < nu; ++j) {
        step(Vec::Zero(nx), Vec::Unit(nu, j), xn, y);
        B.col(j) = xn;
        D.col(j) = y;
    }
    return StateSpace(A, B, C, D);
}

}  // namespace netrate::detail
