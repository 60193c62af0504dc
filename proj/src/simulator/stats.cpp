#include "netrate/simulator.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace netrate {

double student_t_quantile(double p, double dof) {
    return boost::math::quantile(boost::math::students_t_distribution<double>(dof), p);
}

VarianceEstimate estimate_variance(const std::vector<double>& trace, std::size_t burn_in, int batches) {
    if (batches < 20) throw std::invalid_argument("batch-means CI needs at least 20 batches");
    if (trace.size() <= burn_in + 20) throw std::invalid_argument("not enough samples after burn-in");
    const std::size_t n = trace.size() - burn_in;
    const auto first = trace.begin() + static_cast<std::ptrdiff_t>(burn_in);
    const double mean = std::accumulate(first, trace.end(), 0.0) / static_cast<double>(n);
    double ss = 0;
    for (auto it = first; it != trace.end(); ++it) ss += (*it - mean) * (*it - mean);
    VarianceEstimate e;
    e.var = ss / static_cast<double>(n - 1);

    const int b = static_cast<int>(std::min<std::size_t>(batches, n));
    const std::size_t per = n / b;
    std::vector<double> v(b, 0.0);
    for (int i = 0; i < b; ++i) {
        for (std::size_t j = 0; j < per; ++j) {
            const double d = trace[burn_in + i * per + j] - mean;
            v[i] += d * d;
        }
        v[i] /= static_cast<double>(per);
    }
    const double vm = std::accumulate(v.begin(), v.end(), 0.0) / b;
    double vs = 0;
    for (double x : v) vs += (x - vm) * (x - vm);
    const double sd = std::sqrt(vs / (b - 1));
    e.ci = student_t_quantile(0.975, b - 1) * sd / std::sqrt(static_cast<double>(b));
    return e;
}

namespace {

// asymptotic Kolmogorov tail with Stephens' small-sample correction
double kolmogorov_q(double lambda) {
    if (lambda < 0.2) return 1.0;
    double s = 0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        s += (j % 2 ? 2.0 : -2.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(s, 0.0, 1.0);
}

}  // namespace

KsResult ks_uniform(std::vector<double> x, double lo, double hi) {
    if (x.empty()) throw std::invalid_argument("empty sample");
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double D = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double F = std::clamp((x[i] - lo) / (hi - lo), 0.0, 1.0);
        D = std::max({D, (i + 1) / n - F, F - i / n});
    }
    const double sn = std::sqrt(n);
    return {D, kolmogorov_q((sn + 0.12 + 0.11 / sn) * D)};
}

double autocorrelation(const std::vector<double>& x, int lag) {
    const std::size_t n = x.size();
    if (lag < 0 || static_cast<std::size_t>(lag) >= n) throw std::invalid_argument("bad lag");
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double num = 0, den = 0;
    for (std::size_t i = 0; i < n; ++i) {
        den += (x[i] - m) * (x[i] - m);
        if (i + lag < n) num += (x[i] - m) * (x[i + lag] - m);
    }
    return num / den;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty()) throw std::invalid_argument("length mismatch");
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n, mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace netrate
