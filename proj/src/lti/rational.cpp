#include "netrate/lti.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace netrate {

namespace {

void trim_trailing(std::vector<double>& v) {
    while (v.size() > 1 && v.back() == 0.0) v.pop_back();
    if (v.empty()) v.push_back(0.0);
}

std::vector<double> conv(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> c(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    return c;
}

std::vector<double> add(std::vector<double> a, const std::vector<double>& b) {
    if (a.size() < b.size()) a.resize(b.size(), 0.0);
    for (size_t i = 0; i < b.size(); ++i) a[i] += b[i];
    return a;
}

std::vector<double> padded(const std::vector<double>& v, size_t n) {
    std::vector<double> out(v);
    out.resize(n, 0.0);
    return out;
}

}  // namespace

RationalTransfer::RationalTransfer() : num_{0.0}, den_{1.0} {}

RationalTransfer::RationalTransfer(std::vector<double> num, std::vector<double> den)
    : num_(std::move(num)), den_(std::move(den)) {
    if (den_.empty() || std::all_of(den_.begin(), den_.end(), [](double d) { return d == 0.0; }))
        throw InvalidSystem("denominator is identically zero");
    if (den_[0] == 0.0)
        throw InvalidSystem("den[0] == 0: not representable as a causal operator");
    for (double c : num_)
        if (!std::isfinite(c)) throw InvalidSystem("non-finite numerator coefficient");
    for (double c : den_)
        if (!std::isfinite(c)) throw InvalidSystem("non-finite denominator coefficient");
    if (num_.empty()) num_.push_back(0.0);
    const double d0 = den_[0];
    for (double& c : num_) c /= d0;
    for (double& c : den_) c /= d0;
    trim_trailing(num_);
    trim_trailing(den_);
}

RationalTransfer RationalTransfer::constant(double k) { return RationalTransfer({k}, {1.0}); }

bool RationalTransfer::is_zero() const {
    return std::all_of(num_.begin(), num_.end(), [](double c) { return c == 0.0; });
}

int RationalTransfer::order() const {
    return static_cast<int>(std::max(num_.size(), den_.size())) - 1;
}

cplx RationalTransfer::operator()(cplx z) const {
    const cplx zi = 1.0 / z;
    cplx n = 0.0, d = 0.0;
    for (size_t i = num_.size(); i-- > 0;) n = n * zi + num_[i];
    for (size_t i = den_.size(); i-- > 0;) d = d * zi + den_[i];
    return n / d;
}

RationalTransfer RationalTransfer::operator*(const RationalTransfer& o) const {
    return cancel_common(RationalTransfer(conv(num_, o.num_), conv(den_, o.den_)));
}

RationalTransfer RationalTransfer::operator+(const RationalTransfer& o) const {
    if (den_ == o.den_) return cancel_common(RationalTransfer(add(num_, o.num_), den_));
    return cancel_common(
        RationalTransfer(add(conv(num_, o.den_), conv(o.num_, den_)), conv(den_, o.den_)));
}

RationalTransfer RationalTransfer::operator-() const { return scaled(-1.0); }

RationalTransfer RationalTransfer::operator-(const RationalTransfer& o) const { return *this + (-o); }

RationalTransfer RationalTransfer::scaled(double k) const {
    std::vector<double> n(num_);
    for (double& c : n) c *= k;
    return RationalTransfer(n, den_);
}

std::vector<double> RationalTransfer::num_z() const { return padded(num_, order() + 1); }
std::vector<double> RationalTransfer::den_z() const { return padded(den_, order() + 1); }

std::vector<cplx> roots(const std::vector<double>& descending) {
    size_t first = 0;
    while (first < descending.size() && descending[first] == 0.0) ++first;
    if (first == descending.size()) throw InvalidSystem("roots of the zero polynomial");
    const int n = static_cast<int>(descending.size() - first) - 1;
    if (n == 0) return {};
    Mat comp = Mat::Zero(n, n);
    const double lead = descending[first];
    for (int j = 0; j < n; ++j) comp(0, j) = -descending[first + 1 + j] / lead;
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    auto r = eigenvalues(comp);
    sort_roots(r);
    return r;
}

std::vector<double> poly_from_roots(const std::vector<cplx>& r, double lead) {
    std::vector<cplx> p{1.0};
    for (const cplx& root : r) {
        std::vector<cplx> q(p.size() + 1, 0.0);
        for (size_t i = 0; i < p.size(); ++i) {
            q[i] += p[i];
            q[i + 1] -= p[i] * root;
        }
        p = std::move(q);
    }
    std::vector<double> out(p.size());
    for (size_t i = 0; i < p.size(); ++i) out[i] = lead * p[i].real();
    return out;
}

void sort_roots(std::vector<cplx>& r) {
    std::stable_sort(r.begin(), r.end(), [](const cplx& a, const cplx& b) {
        const double ma = std::abs(a), mb = std::abs(b);
        if (std::abs(ma - mb) > 1e-12 * std::max(1.0, std::max(ma, mb))) return ma > mb;
        return std::arg(a) < std::arg(b);
    });
}

std::vector<cplx> poles(const RationalTransfer& g) {
    if (g.is_zero()) return {};
    return roots(g.den_z());
}

std::vector<cplx> zeros(const RationalTransfer& g) {
    if (g.is_zero()) return {};
    return roots(g.num_z());
}

RationalTransfer cancel_common(const RationalTransfer& g, double tol) {
    if (g.is_zero()) return RationalTransfer();
    auto zn = zeros(g);
    auto pn = poles(g);
    std::vector<bool> used(zn.size(), false);
    std::vector<cplx> kept_poles;
    bool cancelled = false;
    for (const cplx& p : pn) {
        int best = -1;
        double bd = tol * std::max(1.0, std::abs(p));
        for (size_t i = 0; i < zn.size(); ++i) {
            if (used[i]) continue;
            const double d = std::abs(zn[i] - p);
            if (d < bd) {
                bd = d;
                best = static_cast<int>(i);
            }
        }
        if (best >= 0) {
            used[best] = true;
            cancelled = true;
        } else {
            kept_poles.push_back(p);
        }
    }
    if (!cancelled) return g;
    std::vector<cplx> kept_zeros;
    for (size_t i = 0; i < zn.size(); ++i)
        if (!used[i]) kept_zeros.push_back(zn[i]);

    auto nz = g.num_z();
    size_t f = 0;
    while (nz[f] == 0.0) ++f;
    const double lead = nz[f] / g.den_z()[0];
    auto numd = poly_from_roots(kept_zeros, lead);
    auto dend = poly_from_roots(kept_poles, 1.0);
    // back to z^-1: divide by z^deg(den)
    std::vector<double> num(dend.size() - numd.size(), 0.0);
    num.insert(num.end(), numd.begin(), numd.end());
    return RationalTransfer(num, dend);
}

bool is_stable(const RationalTransfer& g) {
    for (const cplx& p : poles(g))
        if (std::abs(p) >= 1.0) return false;
    return true;
}

bool is_proper(const RationalTransfer&) { return true; }

bool is_strictly_proper(const RationalTransfer& g) { return g.num()[0] == 0.0; }

RationalTransfer delay_tf(int h) {
    if (h < 0) throw std::invalid_argument("negative delay");
    std::vector<double> num(h + 1, 0.0);
    num[h] = 1.0;
    return RationalTransfer(num, {1.0});
}

RationalTransfer feedback(const RationalTransfer& g, const RationalTransfer& k, double sign) {
    // g / (1 - sign*g*k) with exact polynomial arithmetic
    auto gk_num = conv(g.num(), k.num());
    auto gk_den = conv(g.den(), k.den());
    std::vector<double> sc(gk_num);
    for (double& c : sc) c *= -sign;
    auto den = add(gk_den, sc);
    const size_t n = std::max(den.size(), size_t{1});
    den.resize(n, 0.0);
    if (std::abs(den[0]) < 1e-14 * std::max(1.0, std::abs(gk_den[0])))
        throw IllPosed("feedback interconnection has an algebraic loop");
    return cancel_common(RationalTransfer(conv(g.num(), k.den()), den));
}

RationalTransfer connect(Connection kind, const RationalTransfer& a, const RationalTransfer& b) {
    switch (kind) {
        case Connection::series:
            return a * b;
        case Connection::parallel:
            return a + b;
        case Connection::feedback:
            return feedback(a, b, -1.0);
    }
    return {};
}

}  // namespace netrate
