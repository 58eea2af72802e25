#include "dagas/cyclic_mc.hpp"
#include "dagas/error.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

using namespace dagas;

namespace {

TransferMatrix make(std::initializer_list<std::initializer_list<double>> rows, double p = 0.0)
{
    TransferMatrix t;
    t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index i = 0;
    for (const auto &row : rows) {
        Eigen::Index j = 0;
        for (double x : row) {
            t.values(i, j++) = x;
        }
        ++i;
    }
    t.p = p;
    return t;
}

void for_each_trajectory(int states, int n, const std::function<void(const std::vector<int> &)> &f)
{
    std::vector<int> x(n, 0);
    while (true) {
        f(x);
        int k = 0;
        while (k < n && ++x[k] == states) {
            x[k++] = 0;
        }
        if (k == n) {
            return;
        }
    }
}

ChainSpec random_chain(int states, int n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    ChainSpec c;
    c.transition.resize(states, states);
    for (int i = 0; i < states; ++i) {
        for (int j = 0; j < states; ++j) {
            c.transition(i, j) = u(rng);
        }
        c.transition.row(i) /= c.transition.row(i).sum();
    }
    c.initial = VectorX::Constant(states, 1.0 / states);
    c.cycle = n;
    return c;
}

} // namespace

TEST_CASE("cyclic path probabilities")
{
    ChainSpec sym;
    sym.initial = VectorX::Constant(2, 0.5);
    sym.transition = Matrix::Constant(2, 2, 0.5);
    sym.cycle = 2;
    const std::vector<int> t01{0, 1};
    CHECK(cyclic_path_prob(sym, t01) == doctest::Approx(0.25));

    ChainSpec c = random_chain(3, 1, 5);
    c.initial << 0.2, 0.5, 0.3;
    double z = 0.0;
    for (int y = 0; y < 3; ++y) {
        z += c.initial(y) * c.transition(y, y);
    }
    for (int x = 0; x < 3; ++x) {
        const std::vector<int> one{x};
        CHECK(cyclic_path_prob(c, one) == doctest::Approx(c.initial(x) * c.transition(x, x) / z).epsilon(1e-12));
    }

    ChainSpec id;
    id.initial = VectorX(3);
    id.initial << 0.1, 0.6, 0.3;
    id.transition = Matrix::Identity(3, 3);
    id.cycle = 3;
    const std::vector<int> ccc{1, 1, 1};
    const std::vector<int> mixed{1, 2, 1};
    CHECK(cyclic_path_prob(id, ccc) == doctest::Approx(0.6));
    CHECK(cyclic_path_prob(id, mixed) == 0.0);

    const ChainSpec r = random_chain(3, 6, 9);
    double total = 0.0;
    for_each_trajectory(3, 6, [&](const std::vector<int> &x) { total += cyclic_path_prob(r, x); });
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    ChainSpec bad = sym;
    bad.transition(0, 0) = 0.7;
    CHECK_THROWS_AS(cyclic_path_prob(bad, t01), Error);

    ChainSpec flip;
    flip.initial = VectorX::Constant(2, 0.5);
    flip.transition.resize(2, 2);
    flip.transition << 0, 1, 1, 0;
    flip.cycle = 3;
    try {
        const std::vector<int> t{0, 1, 0};
        cyclic_path_prob(flip, t);
        FAIL("expected an error");
    } catch (const Error &e) {
        CHECK(e.code() == Errc::zero_normalizer);
    }
}

TEST_CASE("cyclic marginals")
{
    const ChainSpec r = random_chain(3, 5, 17);
    for (int x = 0; x < 3; ++x) {
        const double m0 = cyclic_marginal(r, 0, x);
        for (int i = 1; i < 5; ++i) {
            CHECK(cyclic_marginal(r, i, x) == doctest::Approx(m0).epsilon(1e-12));
        }
        // Direct sum over trajectories.
        double direct = 0.0;
        for_each_trajectory(3, 5, [&](const std::vector<int> &t) {
            if (t[2] == x) {
                direct += cyclic_path_prob(r, t);
            }
        });
        CHECK(cyclic_marginal(r, 2, x) == doctest::Approx(direct).epsilon(1e-12));
    }
    for (int i = 0; i < 5; ++i) {
        double s = 0.0;
        for (int x = 0; x < 3; ++x) {
            s += cyclic_marginal(r, i, x);
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }

    // Invariant but non-uniform initial law: the marginal at 1 moves away from it.
    ChainSpec a;
    a.transition.resize(2, 2);
    a.transition << 0.9, 0.1, 0.3, 0.7;
    a.initial.resize(2);
    a.initial << 0.75, 0.25;
    a.cycle = 3;
    CHECK((a.initial.transpose() * a.transition - a.initial.transpose()).norm() < 1e-15);
    CHECK(std::abs(cyclic_marginal(a, 1, 0) - 0.75) > 1e-3);
}

TEST_CASE("transfer cyclic law")
{
    const TransferMatrix v = make({{1, 0.3}, {1, 0}}, 0.3);
    const std::vector<int> t01{0, 1};
    CHECK(transfer_cyclic_law(v, 2, t01) == doctest::Approx(0.1875).epsilon(1e-12));

    const TransferMatrix id = make({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    for (int n : {1, 4}) {
        const std::vector<int> c(n, 2);
        CHECK(transfer_cyclic_law(id, n, c) == doctest::Approx(1.0 / 3));
    }

    const Matrix v6 = scaled_power<double>(v.values, 6).unit;
    const std::vector<int> x0{1};
    CHECK(transfer_cyclic_law(v, 6, x0) == doctest::Approx(v6(1, 1) / v6.trace()).epsilon(1e-12));

    const TransferMatrix nil = make({{0, 1}, {0, 0}});
    CHECK_THROWS_AS(transfer_cyclic_law(nil, 2, t01), Error);
}

TEST_CASE("scaled power handles large exponents")
{
    Matrix m(2, 2);
    m << 3, 1, 1, 2;
    const auto small = scaled_power<double>(m, 7);
    const Matrix direct = m * m * m * m * m * m * m;
    CHECK((small.unit * std::exp(small.log_scale) - direct).norm() < 1e-9 * direct.norm());
    const auto big = scaled_power<double>(m, 5000);
    CHECK(std::isfinite(big.log_scale));
    CHECK(big.unit.allFinite());
}

TEST_CASE("dominant eigen")
{
    const double p = 0.3;
    const TransferMatrix v = make({{1, p}, {1, 0}}, p);
    const EigenTriple e = dominant_eigen(v);
    CHECK(e.lambda == doctest::Approx((1 + std::sqrt(1 + 4 * p)) / 2).epsilon(1e-14));
    CHECK((v.values * e.right - e.lambda * e.right).norm() <= 1e-10 * v.values.norm());
    CHECK((e.left.transpose() * v.values - e.lambda * e.left.transpose()).norm() <= 1e-10 * v.values.norm());
    CHECK(e.left.dot(e.right) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(power_iteration(v.values) == doctest::Approx(e.lambda).epsilon(1e-12));
    CHECK(e.second_modulus == doctest::Approx(std::abs(1 - std::sqrt(1 + 4 * p)) / 2).epsilon(1e-12));

    try {
        dominant_eigen(make({{1, 0}, {0, 1}}));
        FAIL("expected an error");
    } catch (const Error &err) {
        CHECK(err.code() == Errc::dominance_violation);
    }
    try {
        dominant_eigen(make({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}));
        FAIL("expected an error");
    } catch (const Error &err) {
        CHECK((err.code() == Errc::dominance_violation || err.code() == Errc::complex_dominant));
    }
    try {
        dominant_eigen(make({{0, -1}, {1, 0}}));
        FAIL("expected an error");
    } catch (const Error &err) {
        CHECK(err.code() == Errc::invalid_argument);
    }
}

TEST_CASE("cyclic chain from a transfer matrix")
{
    const double p = 0.3;
    const TransferMatrix v = make({{1, p}, {1, 0}}, p);
    const ChainSpec c = to_cyclic_mc(v, 4);
    for (int i = 0; i < 2; ++i) {
        CHECK(c.transition.row(i).sum() == doctest::Approx(1.0).epsilon(1e-14));
    }
    for_each_trajectory(2, 4, [&](const std::vector<int> &x) {
        CHECK(std::abs(cyclic_path_prob(c, x) - transfer_cyclic_law(v, 4, x)) <= 1e-12);
    });

    const TransferMatrix stoch = make({{0.4, 0.6}, {0.2, 0.8}});
    const ChainSpec s = to_cyclic_mc(stoch, 3);
    CHECK((s.transition - stoch.values).norm() < 1e-12);
}

TEST_CASE("limit chain")
{
    const double p = 0.3;
    const TransferMatrix v = make({{1, p}, {1, 0}}, p);
    const EigenTriple e = dominant_eigen(v);
    const ChainSpec c = limit_chain(v, e);
    CHECK(c.initial.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((c.initial.transpose() * c.transition - c.initial.transpose()).norm() < 1e-12);
    const double lambda = (1 + std::sqrt(1 + 4 * p)) / 2;
    CHECK(c.initial(1) == doctest::Approx(p / (p + lambda * lambda)).epsilon(1e-12));
    CHECK(c.initial(1) == doctest::Approx(0.16290).epsilon(1e-4));

    // Prefix laws marginalize consistently and match the Markov product.
    const TransferMatrix l3 = make({{1, p, 0, 0}, {0, 0, 1 - p, p}, {1, p, 0, 0}, {0, 0, 1, p}}, p);
    const EigenTriple e3 = dominant_eigen(l3);
    const ChainSpec c3 = limit_chain(l3, e3);
    for_each_trajectory(4, 3, [&](const std::vector<int> &x) {
        double sum = 0.0;
        for (int y = 0; y < 4; ++y) {
            std::vector<int> longer = x;
            longer.push_back(y);
            sum += limit_prefix_prob(l3, e3, longer);
        }
        CHECK(std::abs(sum - limit_prefix_prob(l3, e3, x)) < 1e-12);
        const double markov = c3.initial(x[0]) * c3.transition(x[0], x[1]) * c3.transition(x[1], x[2]);
        CHECK(std::abs(markov - limit_prefix_prob(l3, e3, x)) < 1e-12);
    });
}

TEST_CASE("finite marginals converge at the spectral rate")
{
    const double p = 0.3;
    const std::vector<int> cycles{10, 20, 30};
    for (const TransferMatrix &v : {make({{1, p}, {1, 0}}, p), make({{1, p}, {1 - p, p}}, p)}) {
        const auto report = marginal_convergence(v, cycles);
        for (double r : report.observed_ratios) {
            CHECK(std::log(r) / std::log(report.predicted_ratio) == doctest::Approx(1.0).epsilon(0.1));
        }
        const ChainSpec c = to_cyclic_mc(v, 10);
        const ChainSpec lim = limit_chain(v);
        CHECK(std::abs(cyclic_marginal(c, 0, 1) - lim.initial(1)) == doctest::Approx(report.deviations[0]).epsilon(1e-6));
    }
}
