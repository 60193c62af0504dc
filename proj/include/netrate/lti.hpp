#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace netrate {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;

struct InvalidSystem : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct IllPosed : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnstableSystem : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct Singularity : std::domain_error {
    using std::domain_error::domain_error;
};
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kCancelTol = 1e-8;
inline constexpr int kSpectralGrid = 4096;

// Coefficients in ascending powers of z^-1, denominator normalised to den[0] = 1.
class RationalTransfer {
public:
    RationalTransfer();
    RationalTransfer(std::vector<double> num, std::vector<double> den);
    static RationalTransfer constant(double k);

    const std::vector<double>& num() const { return num_; }
    const std::vector<double>& den() const { return den_; }

    bool is_zero() const;
    int order() const;  // max(len(num), len(den)) - 1
    cplx operator()(cplx z) const;

    RationalTransfer operator*(const RationalTransfer& o) const;
    RationalTransfer operator+(const RationalTransfer& o) const;
    RationalTransfer operator-(const RationalTransfer& o) const;
    RationalTransfer operator-() const;
    RationalTransfer scaled(double k) const;

    // Coefficients of the z-plane numerator / denominator, highest power first,
    // both of degree order().
    std::vector<double> num_z() const;
    std::vector<double> den_z() const;

private:
    std::vector<double> num_, den_;
};

RationalTransfer cancel_common(const RationalTransfer& g, double tol = kCancelTol);

std::vector<cplx> roots(const std::vector<double>& descending);
std::vector<double> poly_from_roots(const std::vector<cplx>& r, double lead = 1.0);
std::vector<cplx> poles(const RationalTransfer& g);
std::vector<cplx> zeros(const RationalTransfer& g);
void sort_roots(std::vector<cplx>& r);

bool is_stable(const RationalTransfer& g);
bool is_proper(const RationalTransfer& g);
bool is_strictly_proper(const RationalTransfer& g);

struct StateSpace {
    Mat A, B, C, D;

    StateSpace() = default;
    StateSpace(Mat a, Mat b, Mat c, Mat d);
    static StateSpace gain(const Mat& d);

    int order() const { return static_cast<int>(A.rows()); }
    int inputs() const { return static_cast<int>(D.cols()); }
    int outputs() const { return static_cast<int>(D.rows()); }

    StateSpace select(const std::vector<int>& out, const std::vector<int>& in) const;
};

bool is_stable(const StateSpace& s);
bool is_strictly_proper(const StateSpace& s);
double spectral_radius(const Mat& A);

StateSpace to_state_space(const RationalTransfer& g);
RationalTransfer to_transfer(const StateSpace& s, int out = 0, int in = 0);

enum class Connection { series, parallel, feedback };

// series(a, b): a followed by b. feedback(a, b): a in the forward path,
// b in the return path, negative sign.
RationalTransfer connect(Connection kind, const RationalTransfer& a, const RationalTransfer& b);
RationalTransfer feedback(const RationalTransfer& g, const RationalTransfer& k, double sign = -1.0);
StateSpace connect(Connection kind, const StateSpace& a, const StateSpace& b);
StateSpace feedback(const StateSpace& g, const StateSpace& k, double sign = -1.0);
StateSpace append(const StateSpace& a, const StateSpace& b);

RationalTransfer delay_tf(int h);
StateSpace delay_ss(int h);

Mat dlyap(const Mat& A, const Mat& Q);
double h2_norm_sq(const StateSpace& s);
double h2_norm_sq(const RationalTransfer& g);

CMat freq_response(const StateSpace& s, double w);
cplx freq_response(const RationalTransfer& g, double w);

// Repeated frequency evaluation through a Hessenberg form of A.
class FrequencyEvaluator {
public:
    explicit FrequencyEvaluator(const StateSpace& s);
    CMat operator()(double w) const;

private:
    Mat H_, Bt_, Ct_, D_;
};

std::vector<double> spectral_grid(int intervals = kSpectralGrid);
double log_spectral_integral(const std::vector<double>& S, double sigma2);

struct DareResult {
    Mat P;
    Mat K;  // u = K x
    int iterations = 0;
};
// P = A'PA + Q - (A'PB + S)(R + B'PB)^-1 (B'PA + S')
DareResult dare(const Mat& A, const Mat& B, const Mat& Q, const Mat& R, const Mat& S,
                double tol = 1e-12, int max_iter = 100000);

StateSpace controllable_part(const StateSpace& s, double tol = kCancelTol);
StateSpace observable_part(const StateSpace& s, double tol = kCancelTol);
StateSpace minimal_realization(const StateSpace& s, double tol = kCancelTol);
std::vector<cplx> eigenvalues(const Mat& A);

// Block-structured LTI map backed by a single state-space realisation.
class TransferMatrix {
public:
    TransferMatrix() = default;
    TransferMatrix(StateSpace ss, std::vector<int> row_sizes, std::vector<int> col_sizes);
    static TransferMatrix from_entries(const std::vector<std::vector<RationalTransfer>>& g);

    const StateSpace& realization() const { return ss_; }
    int block_rows() const { return static_cast<int>(rows_.size()); }
    int block_cols() const { return static_cast<int>(cols_.size()); }
    const std::vector<int>& row_sizes() const { return rows_; }
    const std::vector<int>& col_sizes() const { return cols_; }

    StateSpace block(int i, int j) const;
    StateSpace entry(int row, int col) const;  // scalar entry
    RationalTransfer entry_tf(int row, int col) const;
    CMat operator()(double w) const { return freq_response(ss_, w); }

private:
    StateSpace ss_;
    std::vector<int> rows_, cols_;
};

// Generic interconnection of state-space blocks through static wiring.
class Interconnect {
public:
    int add_block(const StateSpace& s);
    int add_input(int width);
    // block input port (b, port) += gain * source
    void feed_from_block(int b, int port, int src_block, int src_port, double gain = 1.0);
    void feed_from_input(int b, int port, int ext, int ext_port, double gain = 1.0);
    int add_output();
    void output_from_block(int out, int src_block, int src_port, double gain = 1.0);
    void output_from_input(int out, int ext, int ext_port, double gain = 1.0);

    StateSpace build() const;

private:
    struct Term {
        bool from_block;
        int src, port;
        double gain;
    };
    std::vector<StateSpace> blocks_;
    std::vector<int> input_widths_;
    std::vector<std::vector<std::vector<Term>>> feeds_;  // [block][port]
    std::vector<std::vector<Term>> outputs_;
};

}  // namespace netrate
