#include "netrate/simulator.hpp"

#include <Eigen/Sparse>
#include <fmt/format.h>

#include <cmath>
#include <deque>
#include <numeric>
#include <thread>

namespace netrate {

void SimConfig::validate() const {
    if (!(delta > 0) || !std::isfinite(delta)) throw std::invalid_argument("quantizer step must be positive");
    if (!(horizon > burn_in)) throw std::invalid_argument("horizon must exceed burn-in");
    if (horizon - burn_in <= 20) throw std::invalid_argument("too few samples after burn-in");
    if (batches < 20) throw std::invalid_argument("need at least 20 batches");
    if (realizations < 1) throw std::invalid_argument("need at least one realization");
    delays.validate();
    plant.check_dimensions();
}

namespace {

// Runs x+ = A x + B u, y = C x + D u with a sparse A when that pays off.
class Runner {
public:
    explicit Runner(const StateSpace& s) : B_(s.B), C_(s.C), D_(s.D), x_(Vec::Zero(s.order())) {
        const double n = s.order();
        const double nnz = (s.A.array() != 0.0).count();
        sparse_ = n > 16 && nnz < 0.3 * n * n;
        if (sparse_)
            As_ = s.A.sparseView();
        else
            A_ = s.A;
        xn_.resize(s.order());
    }
    const Vec& step(const Vec& u) {
        y_.noalias() = C_ * x_;
        y_.noalias() += D_ * u;
        if (sparse_)
            xn_.noalias() = As_ * x_;
        else
            xn_.noalias() = A_ * x_;
        xn_.noalias() += B_ * u;
        x_.swap(xn_);
        return y_;
    }
    double max_abs() const { return x_.size() ? x_.cwiseAbs().maxCoeff() : 0.0; }
    Vec& state() { return x_; }

private:
    bool sparse_ = false;
    Mat A_;
    Eigen::SparseMatrix<double, Eigen::RowMajor> As_;
    Mat B_, C_, D_;
    Vec x_, xn_, y_;
};

class DelayLine {
public:
    explicit DelayLine(int h) : buf_(h, 0.0) {}
    double push(double v) {
        if (buf_.empty()) return v;
        const double out = buf_.front();
        buf_.pop_front();
        buf_.push_back(v);
        return out;
    }

private:
    std::deque<double> buf_;
};

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

struct LoopOptions {
    int decoder_lag = 0;
    int y_delay = 0, u_delay = 0;
};

SimResult run_loop(const SimConfig& cfg, Channel& ch, const LoopOptions& lo) {
    cfg.validate();
    const PlantRealization P = realize(cfg.plant);
    if (P.D22.cwiseAbs().maxCoeff() != 0.0) throw std::invalid_argument("G22 must be strictly proper");
    const int nw = P.nw(), nz = P.nz();

    Runner enc(cfg.scheme.encoder()), dec(cfg.scheme.decoder());
    const CounterRng wrng(cfg.seeds.noise, 0), etarng(cfg.seeds.noise, 1), x0rng(cfg.seeds.noise, 2);
    const Dither dither(cfg.seeds.dither, cfg.delta);
    const double sigma = cfg.delta / std::sqrt(12.0);
    ReorderBuffer buf(lo.decoder_lag);
    DelayLine ydl(lo.y_delay), udl(lo.u_delay);

    Vec x = Vec::Zero(P.nx());
    if (cfg.x0_std > 0)
        for (int i = 0; i < P.nx(); ++i) x(i) = cfg.x0_std * x0rng.normal(0, i);
    Vec w(nw), xn(P.nx()), ein(2), din(1);
    double r_prev = 0;

    const std::uint64_t n = cfg.horizon, keep = cfg.horizon - cfg.burn_in;
    std::vector<double> zs(keep * nz);
    std::vector<std::int64_t> symbols;
    if (cfg.noise == ChannelNoise::ecdq) symbols.reserve(keep);
    SimResult res;
    SimTrace& tr = res.trace;
    if (cfg.record_trace) {
        for (auto* v : {&tr.w, &tr.y, &tr.t, &tr.dither, &tr.r_minus_t, &tr.u, &tr.z}) v->reserve(n);
        tr.index.reserve(n);
        tr.delivered.reserve(n);
        tr.delay.reserve(n);
    }

    for (std::uint64_t k = 0; k < n; ++k) {
        for (int j = 0; j < nw; ++j) w(j) = wrng.normal(k, j);
        const double y = (P.C2 * x)(0) + (P.D21 * w)(0);
        ein << r_prev, ydl.push(y);
        const double t = enc.step(ein)(0);

        Word word;
        double d = 0, r = t;
        switch (cfg.noise) {
            case ChannelNoise::ecdq:
                d = dither.at(k);
                word.index = ecdq_encode(t, d, cfg.delta);
                r = ecdq_decode(word.index, d, cfg.delta);
                break;
            case ChannelNoise::awgn:
                r = t + sigma * etarng.normal(k);
                break;
            case ChannelNoise::ideal:
                break;
        }
        word.value = r;
        r_prev = r;
        const int hk = ch.delay_of(k);
        ch.transmit(k, word);
        const ArrivalSet arr = ch.deliver(k);
        res.delivered += arr.members.size();
        buf.push(arr);
        const std::optional<Word> got = buf.pop(k);
        double rin = 0;
        if (got) rin = cfg.noise == ChannelNoise::ecdq ? ecdq_decode(got->index, dither.at(got->emit), cfg.delta)
                                                       : got->value;
        din(0) = rin;
        const double u = udl.push(dec.step(din)(0));

        const Vec z = P.C1 * x + P.D11 * w + P.D12 * u;
        xn.noalias() = P.A * x + P.B1 * w + P.B2 * u;
        x.swap(xn);

        if (!(std::abs(t) < kDivergenceGuard && std::abs(u) < kDivergenceGuard &&
              (x.size() == 0 || x.cwiseAbs().maxCoeff() < kDivergenceGuard)) ||
            ((k & 255u) == 0 && !(std::max(enc.max_abs(), dec.max_abs()) < kDivergenceGuard)))
            throw DivergenceError(fmt::format("closed loop diverged at step {}", k), k);

        if (k >= cfg.burn_in) {
            for (int i = 0; i < nz; ++i) zs[(k - cfg.burn_in) * nz + i] = z(i);
            if (cfg.noise == ChannelNoise::ecdq) symbols.push_back(word.index);
        }
        if (cfg.record_trace) {
            tr.w.push_back(w(0));
            tr.y.push_back(y);
            tr.t.push_back(t);
            tr.dither.push_back(d);
            tr.index.push_back(word.index);
            tr.r_minus_t.push_back(r - t);
            tr.delivered.push_back(got ? static_cast<std::int64_t>(got->emit) : -1);
            tr.u.push_back(u);
            tr.z.push_back(z(0));
            tr.delay.push_back(hk);
        }
    }

    // variance of z summed over components, batch-means CI on the summed squares
    std::vector<double> mean(nz, 0.0);
    for (std::uint64_t k = 0; k < keep; ++k)
        for (int i = 0; i < nz; ++i) mean[i] += zs[k * nz + i];
    for (double& m : mean) m /= static_cast<double>(keep);
    std::vector<double> sq(keep);
    for (std::uint64_t k = 0; k < keep; ++k) {
        double s = 0;
        for (int i = 0; i < nz; ++i) s += (zs[k * nz + i] - mean[i]) * (zs[k * nz + i] - mean[i]);
        sq[k] = s;
    }
    {
        const int b = cfg.batches;
        const std::uint64_t per = keep / b;
        std::vector<double> v(b, 0.0);
        for (int i = 0; i < b; ++i) {
            for (std::uint64_t j = 0; j < per; ++j) v[i] += sq[i * per + j];
            v[i] /= static_cast<double>(per);
        }
        res.var_z_hat = std::accumulate(sq.begin(), sq.end(), 0.0) / static_cast<double>(keep - 1);
        const double vm = std::accumulate(v.begin(), v.end(), 0.0) / b;
        double vs = 0;
        for (double q : v) vs += (q - vm) * (q - vm);
        res.ci_halfwidth = student_t_quantile(0.975, b - 1) * std::sqrt(vs / (b - 1)) / std::sqrt(double(b));
    }

    if (cfg.noise == ChannelNoise::ecdq) {
        const Codebook book = huffman_build(frequencies(symbols), true);
        res.rate_report = rate_and_entropy(symbols, book);
        if (cfg.record_trace) {
            tr.codeword_len.resize(n);
            for (std::uint64_t k = 0; k < n; ++k) tr.codeword_len[k] = book.cost(tr.index[k]);
        }
    } else {
        res.rate_report.sample_count = keep;
    }
    res.rate_report.var_z_hat = res.var_z_hat;
    res.rate_report.ci_halfwidth = res.ci_halfwidth;
    res.emitted = n;
    res.in_flight = ch.in_flight();
    return res;
}

}  // namespace

Seeds derived_seeds(const Seeds& base, int m) {
    if (m == 0) return base;
    const std::uint64_t salt = splitmix(static_cast<std::uint64_t>(m));
    return {splitmix(base.noise ^ salt), splitmix(base.dither ^ salt ^ 0x5bd1e995ull),
            splitmix(base.delay ^ salt ^ 0xc2b2ae35ull)};
}

SimResult simulate_with_channel(const SimConfig& cfg, Channel& channel, int decoder_lag) {
    return run_loop(cfg, channel, {decoder_lag, 0, 0});
}

SimResult simulate_constant(const SimConfig& cfg) {
    if (cfg.delays.mode != DelaySpec::Mode::constant) throw std::invalid_argument("constant delay expected");
    const int h = cfg.delays.h;
    switch (cfg.placement) {
        case Placement::channel: {
            DelayChannel ch(cfg.delays);
            return run_loop(cfg, ch, {h, 0, 0});
        }
        case Placement::measurement: {
            DelayChannel ch(DelaySpec::constant(0));
            return run_loop(cfg, ch, {0, h, 0});
        }
        case Placement::actuation: {
            DelayChannel ch(DelaySpec::constant(0));
            return run_loop(cfg, ch, {0, 0, h});
        }
    }
    return {};
}

SimResult placement_variant(const SimConfig& cfg) { return simulate_constant(cfg); }

SimResult simulate_random(const SimConfig& cfg, int jobs) {
    cfg.validate();
    const int M = cfg.realizations;
    const DelaySpec base = cfg.delays.mode == DelaySpec::Mode::random
                               ? cfg.delays
                               : DelaySpec::random({{cfg.delays.h, 1.0}}, cfg.seeds.delay);
    const int hmax = base.h_max();
    std::vector<SimResult> runs(M);
    std::vector<std::exception_ptr> errors(M);
    auto work = [&](int m) {
        try {
            SimConfig c = cfg;
            c.seeds = derived_seeds(cfg.seeds, m);
            c.delays = DelaySpec::random(base.support, c.seeds.delay);
            c.record_trace = cfg.record_trace && m == 0;
            DelayChannel ch(c.delays);
            runs[m] = run_loop(c, ch, {hmax, 0, 0});
        } catch (...) {
            errors[m] = std::current_exception();
        }
    };
    jobs = std::max(1, std::min(jobs, M));
    if (jobs == 1) {
        for (int m = 0; m < M; ++m) work(m);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t)
            pool.emplace_back([&, t] {
                for (int m = t; m < M; m += jobs) work(m);
            });
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    SimResult out;
    std::vector<double> v, r;
    for (int m = 0; m < M; ++m) {
        const SimResult& s = runs[m];
        out.realizations.push_back({derived_seeds(cfg.seeds, m).delay, s.var_z_hat, s.ci_halfwidth,
                                    s.rate_report.avg_len_bits, s.rate_report.empirical_entropy_bits});
        v.push_back(s.var_z_hat);
        r.push_back(s.rate_report.avg_len_bits);
        out.entropy_a += s.rate_report.empirical_entropy_bits / M;
        out.emitted += s.emitted;
        out.delivered += s.delivered;
        out.in_flight += s.in_flight;
    }
    auto mean_ci = [&](const std::vector<double>& x, double& m, double& ci) {
        m = std::accumulate(x.begin(), x.end(), 0.0) / M;
        ci = 0;
        if (M < 2) return;
        double ss = 0;
        for (double q : x) ss += (q - m) * (q - m);
        ci = student_t_quantile(0.975, M - 1) * std::sqrt(ss / (M - 1)) / std::sqrt(double(M));
    };
    mean_ci(v, out.var_za, out.var_za_ci);
    mean_ci(r, out.rate_a, out.rate_a_ci);
    out.var_z_hat = out.var_za;
    out.ci_halfwidth = out.var_za_ci;
    out.rate_report.avg_len_bits = out.rate_a;
    out.rate_report.empirical_entropy_bits = out.entropy_a;
    out.rate_report.sample_count = runs[0].rate_report.sample_count * M;
    out.rate_report.var_z_hat = out.var_za;
    out.rate_report.ci_halfwidth = out.var_za_ci;
    out.trace = std::move(runs[0].trace);
    return out;
}

void write_sim_trace(std::ostream& os, const SimTrace& tr) {
    os << "k,w,y,t,dither,index,codeword_len,delivered,u,z\n";
    for (std::size_t k = 0; k < tr.t.size(); ++k)
        os << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{},{},{},{:.17g},{:.17g}\n", k, tr.w[k], tr.y[k],
                          tr.t[k], tr.dither[k], tr.index[k], k < tr.codeword_len.size() ? tr.codeword_len[k] : 0,
                          tr.delivered[k], tr.u[k], tr.z[k]);
}

}  // namespace netrate
