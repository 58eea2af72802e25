#pragma once

// Markov chains conditioned to return to their start after N steps, laws
// built from nonnegative transfer matrices, and the N -> infinity limit chain.

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dagas {

using Matrix = Eigen::MatrixXd;
using VectorX = Eigen::VectorXd;

struct ChainSpec {
    VectorX initial;
    Matrix transition;
    std::optional<int> cycle; // N for a cyclic chain

    std::size_t states() const noexcept { return static_cast<std::size_t>(initial.size()); }
};

// Throws invalid-argument unless the law and the rows sum to one within 1e-12.
void validate(const ChainSpec &chain);

// Nonnegative matrix over window states {0,1}^window; state bits are read
// with the oldest cell as the most significant bit.
struct TransferMatrix {
    Matrix values;
    int window = 1;
    double p = 0.0;
    std::string label;

    std::size_t states() const noexcept { return static_cast<std::size_t>(values.rows()); }
};

struct EigenTriple {
    double lambda = 0.0;
    VectorX left;
    VectorX right;
    std::vector<std::complex<double>> spectrum; // by decreasing modulus
    double second_modulus = 0.0;

    double ratio() const noexcept { return second_modulus / lambda; }
};

// M^n = unit * exp(log_scale), with `unit` rescaled after every product so
// that large n neither overflows nor underflows.
template <typename Scalar>
struct ScaledPower {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> unit;
    Scalar log_scale;
};

template <typename Scalar>
ScaledPower<Scalar> scaled_power(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> &m, long long n)
{
    using std::log;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    auto rescale = [](Mat &a, Scalar &ls) {
        Scalar top = a.cwiseAbs().maxCoeff();
        if (top > Scalar(0)) {
            a /= top;
            ls += log(top);
        }
    };
    Mat result = Mat::Identity(m.rows(), m.cols());
    Scalar result_ls(0);
    Mat base = m;
    Scalar base_ls(0);
    rescale(base, base_ls);
    while (n > 0) {
        if (n & 1) {
            Mat t = result * base;
            result = t;
            result_ls += base_ls;
            rescale(result, result_ls);
        }
        n >>= 1;
        if (n > 0) {
            Mat t = base * base;
            base = t;
            base_ls += base_ls;
            rescale(base, base_ls);
        }
    }
    return {result, result_ls};
}

// Finite-N cyclic laws.
double cyclic_path_prob(const ChainSpec &chain, std::span<const int> trajectory);
double cyclic_marginal(const ChainSpec &chain, int position, int state);
double transfer_cyclic_law(const TransferMatrix &v, int cycle, std::span<const int> prefix);

EigenTriple dominant_eigen(const TransferMatrix &v);
double power_iteration(const Matrix &v, int iterations = 2000);

// Chain with M_ij = V_ij R_j / (lambda R_i) and uniform initial law.
ChainSpec to_cyclic_mc(const TransferMatrix &v, int cycle);
// Same transition, initial law nu(x) = L_x R_x, no cycle.
ChainSpec limit_chain(const TransferMatrix &v);
ChainSpec limit_chain(const TransferMatrix &v, const EigenTriple &eigen);
// Law of a prefix x_0..x_k under the limit chain: L_{x_0} prod V R_{x_k} / lambda^k.
double limit_prefix_prob(const TransferMatrix &v, const EigenTriple &eigen, std::span<const int> prefix);

// Distance of the finite-N position-0 marginals from the limit law,
// computed with 50 significant digits so that decays far below double
// precision stay visible.
struct ConvergenceReport {
    double predicted_ratio = 0.0; // |lambda_2 / lambda|
    std::vector<int> cycles;
    std::vector<double> deviations; // max_x |P_N(X_0 = x) - nu(x)|
    std::vector<double> observed_ratios; // per-step decay between consecutive cycles
};

ConvergenceReport marginal_convergence(const TransferMatrix &v, std::span<const int> cycles);

} // namespace dagas
