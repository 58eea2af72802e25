#include "dagas/error.hpp"
#include "dagas/transfer.hpp"

#include <doctest.h>

#include <bit>
#include <cmath>

using namespace dagas;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows)
{
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index i = 0;
    for (const auto &row : rows) {
        Eigen::Index j = 0;
        for (double x : row) {
            m(i, j++) = x;
        }
        ++i;
    }
    return m;
}

} // namespace

TEST_CASE("small transfer matrices")
{
    const double p = 0.3;
    CHECK(build_transfer(TransferFamily::lr({0, 1}), p).values.isApprox(mat({{1, p}, {1 - p, p}})));
    CHECK(build_transfer(TransferFamily::tri_pair(), p).values.isApprox(mat({{1, p}, {1, 0}})));
    CHECK(build_transfer(TransferFamily::tri_line(), p).values.isApprox(mat({{1 + p, p}, {1, p}})));
    CHECK(build_transfer(TransferFamily::tn(2), p).values.isApprox(mat({{1 + p, 1}, {p, p}})));
    CHECK(build_transfer(TransferFamily::lr({0, 1, 2}), p)
              .values.isApprox(mat({{1, p, 0, 0}, {0, 0, 1 - p, p}, {1 - p, p, 0, 0}, {0, 0, 1 - p, p}})));
    CHECK_THROWS_AS(TransferFamily::tn(1), Error);
    CHECK_THROWS_AS(TransferFamily::parse("Hex"), Error);
    CHECK(TransferFamily::parse("LR:0,1,4").to_string() == "LR:0,1,4");
    CHECK(TransferFamily::parse("Tn:5").window() == 4);
}

TEST_CASE("zero pattern and primitivity")
{
    for (const char *name : {"LR:0,1,4", "LR:0,2,3", "Tn:3", "Tn:4", "Tn:5"}) {
        const TransferFamily f = TransferFamily::parse(name);
        const TransferMatrix v = build_transfer(f, 0.2);
        const int m = v.window;
        const unsigned keep = (1u << (m - 1)) - 1;
        for (unsigned a = 0; a < v.states(); ++a) {
            for (unsigned b = 0; b < v.states(); ++b) {
                CHECK((v.values(a, b) != 0.0) == ((b >> 1) == (a & keep)));
            }
        }
        Matrix power = v.values;
        bool positive = false;
        for (std::size_t k = 1; k <= v.states() && !positive; ++k) {
            positive = (power.array() > 0.0).all();
            power = power * v.values;
        }
        CHECK(positive);
    }
}

TEST_CASE("neighborhoods")
{
    auto n1 = neighborhoods(TransferFamily::lr({0, 1}), {0}, 5);
    CHECK(n1.forward == std::vector<int>{0, 1});
    CHECK(n1.backward == std::vector<int>{0, 4});
    CHECK(neighborhoods(TransferFamily::tri_line(), {2}, 6).forward == std::vector<int>{1, 3});
    CHECK(neighborhoods(TransferFamily::tn(3), {0}, 5).forward == std::vector<int>{0, 1, 4});
    CHECK(neighborhoods(TransferFamily::tn(4), {0}, 8).forward == std::vector<int>{1, 3, 5, 7});
    // Forward and backward neighborhoods have equal sizes when R is symmetric.
    for (unsigned mask = 0; mask < 128; ++mask) {
        std::vector<int> c;
        for (int i = 0; i < 7; ++i) {
            if (mask >> i & 1u) {
                c.push_back(i);
            }
        }
        const auto nb = neighborhoods(TransferFamily::lr({0, 1, 3, 4}), c, 9);
        CHECK(nb.forward.size() == nb.backward.size());
    }
    // ... but not in general: {0,1,4} + {0,1,4} has 6 elements, {0,1,4} - {0,1,4} has 7.
    const auto skew = neighborhoods(TransferFamily::lr({0, 1, 4}), {0, 1, 4}, 12);
    CHECK(skew.forward.size() == 6);
    CHECK(skew.backward.size() == 7);
    CHECK_THROWS_AS(neighborhoods(TransferFamily::lr({0, 1}), {5}, 5), Error);
}

TEST_CASE("line laws: closed and product forms agree")
{
    for (const char *name : {"LR:0,1", "LR:0,1,2", "LR:0,1,4", "LR:0,2,3", "TriPair", "TriLine", "Tn:2", "Tn:3", "Tn:4"}) {
        const TransferFamily f = TransferFamily::parse(name);
        for (double p : {0.1, 0.25, 0.4}) {
            for (int width = std::max(f.window() + 1, f.kind == TransferFamily::Kind::tn ? f.n : 2); width <= 7;
                 ++width) {
                CAPTURE(std::string(name));
                CAPTURE(width);
                const LineLaw law = stationary_line_law(f, width, p);
                CHECK(law.max_difference <= 1e-12);
                CHECK(std::abs(law.trace - law.subset_normalizer) <= 1e-12 * law.trace);
                CHECK(law.convention == IndexConvention::zero_based);
                double total = 0.0;
                for (double x : law.closed) {
                    total += x;
                }
                CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("line law of L2 on four sites")
{
    const double p = 0.3;
    const LineLaw law = stationary_line_law(TransferFamily::lr({0, 1}), 4, p);
    double z = 0.0;
    for (unsigned c = 0; c < 16; ++c) {
        unsigned nb = (c | ((c << 1) | (c >> 3))) & 15u;
        z += std::pow(p, std::popcount(c)) * std::pow(1 - p, std::popcount(nb) - std::popcount(c));
    }
    CHECK(law.at(0) == doctest::Approx(1.0 / z).epsilon(1e-14));

    // Pair law vanishes on configurations with an occupied child.
    const auto pair = pair_law(TransferFamily::tri_line(), 4, p);
    CHECK(pair[1u | (1u << 4)] == 0.0);
    CHECK(pair[2u | (1u << 4)] == 0.0);
    CHECK(pair[1u | (2u << 4)] > 0.0);
}

TEST_CASE("stationary laws are fixed points of the layer recurrence")
{
    for (const char *name :
         {"LR:0,1", "LR:0,1,2", "LR:0,2,4", "LR:0,1,3,4", "TriPair", "TriLine", "Tn:3", "Tn:4", "Tn:5"}) {
        const TransferFamily f = TransferFamily::parse(name);
        for (double p : {0.15, 0.3}) {
            for (int width : {5, 6}) {
                CAPTURE(std::string(name));
                CAPTURE(p);
                CAPTURE(width);
                const RecurrenceReport r = recurrence_residual(f, width, p);
                CHECK(r.residual <= 1e-12);
                CHECK(r.product_residual <= 1e-12);
                CHECK(r.marginal_residual <= 1e-12);
                CHECK(r.trace_residual <= 1e-12);
            }
        }
    }
}

TEST_CASE("the product-form law is not stationary for asymmetric offsets")
{
    for (const char *name : {"LR:0,1,3", "LR:0,1,4", "LR:0,1,2,4"}) {
        CAPTURE(std::string(name));
        const RecurrenceReport r = recurrence_residual(TransferFamily::parse(name), 8, 0.25);
        CHECK(r.residual > 1e-4);
        CHECK(r.trace_residual <= 1e-12);
    }
    // Width 7 turns {0,1,4} into the symmetric {-1,0,1}.
    CHECK(recurrence_residual(TransferFamily::lr({0, 1, 4}), 7, 0.25).residual <= 1e-12);
}

TEST_CASE("the recurrence check detects perturbations")
{
    const TransferFamily l3 = TransferFamily::lr({0, 1, 2});
    auto law = stationary_line_law(l3, 6, 0.3).closed;
    const double eps = 1e-3;
    law[5] += eps;
    for (double &x : law) {
        x /= 1 + eps;
    }
    CHECK(recurrence_residual(l3, 6, 0.3, law) > eps / 2);

    auto pair = pair_law(TransferFamily::tri_line(), 6, 0.25);
    pair[3 << 6] += eps;
    for (double &x : pair) {
        x /= 1 + eps;
    }
    CHECK(recurrence_residual(TransferFamily::tri_pair(), 6, 0.25, pair) > eps / 2);
}

TEST_CASE("width limits")
{
    CHECK_THROWS_AS(stationary_line_law(TransferFamily::lr({0, 1, 4}), 4, 0.2), Error);
    try {
        stationary_line_law(TransferFamily::lr({0, 1}), 25, 0.2);
        FAIL("expected an error");
    } catch (const Error &e) {
        CHECK(e.code() == Errc::width_too_large);
    }
}

TEST_CASE("exact characteristic polynomials")
{
    // det(xI - A) for a 2x2 matrix.
    const std::vector<std::vector<Rational>> a{{Rational(2), Rational(1)}, {Rational(3), Rational(4)}};
    CHECK(characteristic_polynomial(a) == std::vector<Rational>{Rational(5), Rational(-6), Rational(1)});

    const Rational p(1, 4);
    const CharPolyReport t2 = char_poly_check(TransferFamily::tn(2), p);
    CHECK(t2.computed == std::vector<Rational>{p * p, -(1 + 2 * p), Rational(1)});
    CHECK(t2.printed_matches);
    for (int n : {3, 4, 5}) {
        const CharPolyReport r = char_poly_check(TransferFamily::tn(n), Rational(1, 3));
        CHECK(r.printed_matches);
        CHECK(r.computed.size() == (std::size_t{1} << (n - 1)) + 1);
        for (const auto &[name, value] : r.residuals) {
            if (name == "derived-root-identity" || name == "charpoly-at-lambda" || name == "printed-chi-at-lambda") {
                CHECK(std::abs(value) < 1e-9);
            }
        }
    }
    const CharPolyReport l2 = char_poly_check(TransferFamily::lr({0, 1}), Rational(1, 3));
    CHECK(l2.computed == std::vector<Rational>{Rational(1, 9), Rational(-4, 3), Rational(1)});
}
