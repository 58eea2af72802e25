#include "dagas/cyclic_mc.hpp"

#include "dagas/error.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>

#include <algorithm>
#include <cmath>

namespace dagas {

namespace {

using HighFloat = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<50>, boost::multiprecision::et_off>;
using HighMatrix = Eigen::Matrix<HighFloat, Eigen::Dynamic, Eigen::Dynamic>;
using HighVector = Eigen::Matrix<HighFloat, Eigen::Dynamic, 1>;

void check_state(int x, std::size_t states, const char *field)
{
    if (x < 0 || static_cast<std::size_t>(x) >= states) {
        throw Error(Errc::invalid_argument, field, "state " + std::to_string(x) + " out of range");
    }
}

void check_square(const Matrix &m, const char *field)
{
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw Error(Errc::invalid_argument, field, "matrix must be square and nonempty");
    }
    if ((m.array() < 0.0).any() || !m.allFinite()) {
        throw Error(Errc::invalid_argument, field, "matrix entries must be finite and nonnegative");
    }
}

int require_cycle(const ChainSpec &chain)
{
    if (!chain.cycle) {
        throw Error(Errc::invalid_argument, "N", "chain has no cycle length");
    }
    return *chain.cycle;
}

// Transition built from a right eigenvector.
template <typename Mat, typename Vec, typename Scalar>
Mat tilted(const Mat &v, const Vec &right, const Scalar &lambda)
{
    Mat m(v.rows(), v.cols());
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        for (Eigen::Index j = 0; j < v.cols(); ++j) {
            m(i, j) = v(i, j) * right(j) / (lambda * right(i));
        }
    }
    return m;
}

} // namespace

void validate(const ChainSpec &chain)
{
    check_square(chain.transition, "M");
    if (chain.initial.size() != chain.transition.rows()) {
        throw Error(Errc::invalid_argument, "nu", "initial law and transition have different sizes");
    }
    if ((chain.initial.array() < 0.0).any() || std::abs(chain.initial.sum() - 1.0) > 1e-12) {
        throw Error(Errc::invalid_argument, "nu", "initial law must be a probability vector");
    }
    for (Eigen::Index i = 0; i < chain.transition.rows(); ++i) {
        if (std::abs(chain.transition.row(i).sum() - 1.0) > 1e-12) {
            throw Error(Errc::invalid_argument, "M", "row " + std::to_string(i) + " does not sum to 1");
        }
    }
    if (chain.cycle && *chain.cycle < 1) {
        throw Error(Errc::invalid_argument, "N", "cycle length must be positive");
    }
}

double cyclic_path_prob(const ChainSpec &chain, std::span<const int> trajectory)
{
    validate(chain);
    const int n = require_cycle(chain);
    if (static_cast<int>(trajectory.size()) != n) {
        throw Error(Errc::invalid_argument, "trajectory", "trajectory length must equal N");
    }
    for (int x : trajectory) {
        check_state(x, chain.states(), "trajectory");
    }
    const auto power = scaled_power<double>(chain.transition, n);
    const double z = chain.initial.dot(power.unit.diagonal());
    if (!(z > 0.0)) {
        throw Error(Errc::zero_normalizer, "N", "the chain cannot return to its start in N steps");
    }
    double log_weight = std::log(chain.initial(trajectory[0]));
    for (int i = 0; i < n; ++i) {
        log_weight += std::log(chain.transition(trajectory[i], trajectory[(i + 1) % n]));
    }
    if (!std::isfinite(log_weight)) {
        return 0.0;
    }
    return std::exp(log_weight - power.log_scale - std::log(z));
}

double cyclic_marginal(const ChainSpec &chain, int position, int state)
{
    validate(chain);
    const int n = require_cycle(chain);
    if (position < 0 || position >= n) {
        throw Error(Errc::invalid_argument, "i", "position must lie in [0, N)");
    }
    check_state(state, chain.states(), "x");
    const auto full = scaled_power<double>(chain.transition, n);
    const double z = chain.initial.dot(full.unit.diagonal());
    if (!(z > 0.0)) {
        throw Error(Errc::zero_normalizer, "N", "the chain cannot return to its start in N steps");
    }
    const auto head = scaled_power<double>(chain.transition, position);
    const auto tail = scaled_power<double>(chain.transition, n - position);
    double sum = 0.0;
    for (Eigen::Index x0 = 0; x0 < chain.initial.size(); ++x0) {
        sum += chain.initial(x0) * head.unit(x0, state) * tail.unit(state, x0);
    }
    return sum / z * std::exp(head.log_scale + tail.log_scale - full.log_scale);
}

double transfer_cyclic_law(const TransferMatrix &v, int cycle, std::span<const int> prefix)
{
    check_square(v.values, "V");
    if (cycle < 1) {
        throw Error(Errc::invalid_argument, "N", "cycle length must be positive");
    }
    if (prefix.empty() || static_cast<int>(prefix.size()) > cycle) {
        throw Error(Errc::invalid_argument, "prefix", "prefix must contain between 1 and N states");
    }
    for (int x : prefix) {
        check_state(x, v.states(), "prefix");
    }
    const int k = static_cast<int>(prefix.size()) - 1;
    const auto full = scaled_power<double>(v.values, cycle);
    const double trace = full.unit.trace();
    if (!(trace > 0.0)) {
        throw Error(Errc::zero_trace, "N", "trace(V^N) vanishes");
    }
    double weight = 1.0;
    for (int i = 0; i < k; ++i) {
        weight *= v.values(prefix[i], prefix[i + 1]);
    }
    const auto rest = scaled_power<double>(v.values, cycle - k);
    return weight * rest.unit(prefix[k], prefix[0]) / trace * std::exp(rest.log_scale - full.log_scale);
}

EigenTriple dominant_eigen(const TransferMatrix &v)
{
    check_square(v.values, "V");
    Eigen::EigenSolver<Matrix> right_solver(v.values);
    Eigen::EigenSolver<Matrix> left_solver(v.values.transpose());
    if (right_solver.info() != Eigen::Success || left_solver.info() != Eigen::Success) {
        throw Error(Errc::dominance_violation, "V", "eigen-decomposition failed");
    }
    const auto values = right_solver.eigenvalues();
    std::vector<Eigen::Index> order(values.size());
    for (Eigen::Index k = 0; k < values.size(); ++k) {
        order[k] = k;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return std::abs(values(a)) > std::abs(values(b)); });

    EigenTriple out;
    for (Eigen::Index k : order) {
        out.spectrum.push_back(values(k));
    }
    const std::complex<double> top = out.spectrum.front();
    const double top_modulus = std::abs(top);
    if (!(top_modulus > 0.0)) {
        throw Error(Errc::dominance_violation, "V", "V is nilpotent");
    }
    if (std::abs(top.imag()) > 1e-12 * top_modulus || top.real() < 0.0) {
        throw Error(Errc::complex_dominant, "V", "the eigenvalue of largest modulus is not positive real");
    }
    out.second_modulus = out.spectrum.size() > 1 ? std::abs(out.spectrum[1]) : 0.0;
    if (top_modulus - out.second_modulus <= 1e-8 * top_modulus) {
        throw Error(Errc::dominance_violation, "V", "dominant eigenvalue is not simple and strictly dominant");
    }
    out.lambda = top.real();

    out.right = right_solver.eigenvectors().col(order.front()).real();
    const auto left_values = left_solver.eigenvalues();
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < left_values.size(); ++k) {
        if (std::abs(left_values(k) - top) < std::abs(left_values(best) - top)) {
            best = k;
        }
    }
    out.left = left_solver.eigenvectors().col(best).real();
    if (out.right.sum() < 0.0) {
        out.right = -out.right;
    }
    const double dot = out.left.dot(out.right);
    if (std::abs(dot) < 1e-300) {
        throw Error(Errc::dominance_violation, "V", "left and right eigenvectors are orthogonal");
    }
    out.left /= dot;
    return out;
}

double power_iteration(const Matrix &v, int iterations)
{
    VectorX x = VectorX::Ones(v.rows());
    double lambda = 0.0;
    for (int k = 0; k < iterations; ++k) {
        VectorX y = v * x;
        lambda = y.norm() / x.norm();
        x = y / y.norm();
    }
    return lambda;
}

namespace {

void require_positive_right(const EigenTriple &e)
{
    if ((e.right.array() <= 0.0).any()) {
        throw Error(Errc::dominance_violation, "V", "right eigenvector has non-positive entries");
    }
}

} // namespace

ChainSpec to_cyclic_mc(const TransferMatrix &v, int cycle)
{
    if (cycle < 1) {
        throw Error(Errc::invalid_argument, "N", "cycle length must be positive");
    }
    const EigenTriple e = dominant_eigen(v);
    require_positive_right(e);
    ChainSpec out;
    const auto n = static_cast<Eigen::Index>(v.states());
    out.initial = VectorX::Constant(n, 1.0 / static_cast<double>(n));
    out.transition = tilted(v.values, e.right, e.lambda);
    out.cycle = cycle;
    return out;
}

ChainSpec limit_chain(const TransferMatrix &v)
{
    return limit_chain(v, dominant_eigen(v));
}

ChainSpec limit_chain(const TransferMatrix &v, const EigenTriple &e)
{
    require_positive_right(e);
    ChainSpec out;
    out.initial = e.left.cwiseProduct(e.right);
    out.transition = tilted(v.values, e.right, e.lambda);
    return out;
}

double limit_prefix_prob(const TransferMatrix &v, const EigenTriple &e, std::span<const int> prefix)
{
    if (prefix.empty()) {
        throw Error(Errc::invalid_argument, "prefix", "prefix must be nonempty");
    }
    for (int x : prefix) {
        check_state(x, v.states(), "prefix");
    }
    double w = e.left(prefix.front()) * e.right(prefix.back());
    for (std::size_t i = 0; i + 1 < prefix.size(); ++i) {
        w *= v.values(prefix[i], prefix[i + 1]) / e.lambda;
    }
    return w;
}

ConvergenceReport marginal_convergence(const TransferMatrix &v, std::span<const int> cycles)
{
    const EigenTriple e = dominant_eigen(v);
    require_positive_right(e);
    const auto n = static_cast<Eigen::Index>(v.states());

    // Refine the Perron pair by inverse iteration in extended precision.
    const HighMatrix vh = v.values.cast<HighFloat>();
    const HighFloat shift(e.lambda);
    const HighMatrix shifted = vh - shift * HighMatrix::Identity(n, n);
    const Eigen::PartialPivLU<HighMatrix> lu(shifted);
    const Eigen::PartialPivLU<HighMatrix> lu_t(HighMatrix(shifted.transpose()));
    HighVector right = e.right.cast<HighFloat>();
    HighVector left = e.left.cast<HighFloat>();
    for (int it = 0; it < 4; ++it) {
        HighVector r = lu.solve(right);
        right = r / r.sum();
        HighVector l = lu_t.solve(left);
        left = l / l.sum();
    }
    HighVector vr = vh * right;
    const HighFloat lambda = left.dot(vr) / left.dot(right);
    left /= left.dot(right);
    const HighVector nu = left.cwiseProduct(right);
    const HighMatrix m = tilted(vh, right, lambda);

    ConvergenceReport out;
    out.predicted_ratio = e.ratio();
    for (int cycle : cycles) {
        if (cycle < 1) {
            throw Error(Errc::invalid_argument, "N", "cycle length must be positive");
        }
        // Uniform initial law: P(X_0 = x) = (M^N)_xx / trace(M^N).
        const auto power = scaled_power<HighFloat>(m, cycle);
        const HighFloat trace = power.unit.trace();
        HighFloat worst(0);
        for (Eigen::Index x = 0; x < n; ++x) {
            HighFloat d = abs(power.unit(x, x) / trace - nu(x));
            if (d > worst) {
                worst = d;
            }
        }
        out.cycles.push_back(cycle);
        out.deviations.push_back(worst.convert_to<double>());
    }
    for (std::size_t k = 1; k < out.cycles.size(); ++k) {
        const double steps = out.cycles[k] - out.cycles[k - 1];
        out.observed_ratios.push_back(std::pow(out.deviations[k] / out.deviations[k - 1], 1.0 / steps));
    }
    return out;
}

} // namespace dagas
