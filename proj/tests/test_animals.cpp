#include "dagas/animals.hpp"
#include "dagas/error.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace dagas;

namespace {

std::vector<std::uint64_t> as_u64(const CountSeries &s)
{
    std::vector<std::uint64_t> out;
    for (const auto &c : s.coeffs) {
        out.push_back(c.convert_to<std::uint64_t>());
    }
    return out;
}

std::vector<std::uint64_t> counts(const Lattice &l, std::vector<Vertex> s, int k_max,
                                  Enumerator e = Enumerator::canonical_augmentation)
{
    return as_u64(enumerate_counts(l, s, k_max, e));
}

} // namespace

TEST_CASE("small counts")
{
    CHECK(counts(Lattice::lr({0, 1}), {{0, 0}}, 3) == std::vector<std::uint64_t>{1, 2, 5});
    CHECK(counts(Lattice::lr({0, 1}), {{0, 0}}, 8) ==
          std::vector<std::uint64_t>{1, 2, 5, 13, 35, 96, 267, 750});
    CHECK(counts(Lattice::triangular(), {{0, 0}}, 2) == std::vector<std::uint64_t>{1, 3});
    CHECK(counts(Lattice::lr({0, 1, 2}), {{0, 0}}, 8) ==
          std::vector<std::uint64_t>{1, 3, 12, 50, 216, 952, 4256, 19224});
    CHECK(counts(Lattice::lr({0, 1}), {}, 0) == std::vector<std::uint64_t>{1});
    CHECK(counts(Lattice::lr({0, 1}), {}, 3) == std::vector<std::uint64_t>{1, 0, 0, 0});
}

TEST_CASE("triangular single-source counts are central binomials")
{
    const auto a = counts(Lattice::triangular(), {{0, 0}}, 11);
    for (int k = 1; k <= 11; ++k) {
        CHECK(a[k - 1] == oracle::binomial(2 * k - 1, k));
    }
}

TEST_CASE("both enumerators agree with the subset oracle")
{
    struct Case {
        Lattice lattice;
        std::vector<Vertex> source;
        int k_max;
    };
    const std::vector<Case> cases{
        {Lattice::lr({0, 1}), {{0, 0}}, 7},
        {Lattice::lr({0, 1}), {{0, 0}, {2, 0}}, 7},
        {Lattice::lr({0, 1, 4}), {{0, 0}}, 6},
        {Lattice::triangular(), {{0, 0}}, 6},
        {Lattice::triangular(), {{0, 0}, {2, 0}}, 6},
        {Lattice::tn(3), {{0, 0}}, 5},
        {Lattice::tn(4), {{0, 0}}, 5},
        {Lattice::lr({0, 1}).cyclic(3), {{0, 0}}, 7},
        {Lattice::triangular().cyclic(4), {{0, 0}, {2, 0}}, 6},
    };
    for (const Case &c : cases) {
        CAPTURE(c.lattice.to_string());
        const auto fast = counts(c.lattice, c.source, c.k_max);
        CHECK(fast == counts(c.lattice, c.source, c.k_max, Enumerator::naive));
        CHECK(fast == oracle::subset_counts(c.lattice, c.source, c.k_max));
    }
}

TEST_CASE("thread count does not change results")
{
    EnumerationLimits one;
    one.threads = 1;
    EnumerationLimits four;
    four.threads = 4;
    const std::vector<Vertex> s{{0, 0}, {3, 0}};
    CHECK(enumerate_counts(Lattice::tn(3), s, 9, Enumerator::canonical_augmentation, one).coeffs ==
          enumerate_counts(Lattice::tn(3), s, 9, Enumerator::canonical_augmentation, four).coeffs);
}

TEST_CASE("translation invariance and cylinder agreement")
{
    const Lattice tri = Lattice::triangular();
    CHECK(counts(tri, {{0, 0}, {4, 0}}, 9) == counts(tri, {{3, 7}, {7, 7}}, 9));
    const Lattice lr = Lattice::lr({0, 1, 4});
    CHECK(counts(lr, {{0, 0}}, 8) == counts(lr, {{-5, 2}}, 8));
    // Ball radius 7 plus the largest offset fits in width 20.
    CHECK(counts(Lattice::lr({0, 1}).cyclic(20), {{0, 0}}, 8) == counts(Lattice::lr({0, 1}), {{0, 0}}, 8));
    CHECK(counts(tri.cyclic(20), {{0, 0}}, 8) == counts(tri, {{0, 0}}, 8));
    CHECK(counts(Lattice::lr({0, 1}).cyclic(3), {{0, 0}}, 8) != counts(Lattice::lr({0, 1}), {{0, 0}}, 8));
}

TEST_CASE("enumeration errors")
{
    try {
        enumerate_counts(Lattice::lr({0, 1}), std::vector<Vertex>{{0, 0}, {1, 1}}, 4);
        FAIL("expected an error");
    } catch (const Error &e) {
        CHECK(e.code() == Errc::not_a_free_set);
    }
    try {
        enumerate_counts(Lattice::lr({0, 1}), std::vector<Vertex>{{0, 0}}, 40);
        FAIL("expected an error");
    } catch (const Error &e) {
        CHECK(e.code() == Errc::budget_exceeded);
    }
    EnumerationLimits tight;
    tight.max_animals = 1000;
    CHECK_THROWS_AS(enumerate_counts(Lattice::triangular(), std::vector<Vertex>{{0, 0}}, 12,
                                     Enumerator::canonical_augmentation, tight),
                    Error);
    CHECK_THROWS_AS(enumerate_counts(Lattice::triangular(), std::vector<Vertex>{{0, 0}}, 12, Enumerator::naive, tight),
                    Error);
    CHECK_THROWS_AS(enumerate_counts(Lattice::lr({0, 1}), std::vector<Vertex>{{0, 0}, {3, 0}}, 1), Error);
}

TEST_CASE("alternating evaluation")
{
    CountSeries s;
    s.source = {{0, 0}};
    s.k_max = 3;
    s.coeffs = {1, 2, 5};
    auto v = series_eval_alternating(s, 0.1);
    CHECK(v.value == doctest::Approx(0.085).epsilon(1e-12));
    CHECK(v.growth_ratio == doctest::Approx(2.5));
    CHECK(v.truncation_bound == doctest::Approx(5 * 2.5 * 1e-4 / 0.75).epsilon(1e-12));

    CountSeries empty;
    empty.k_max = 0;
    empty.coeffs = {1};
    auto e = series_eval_alternating(empty, 0.4);
    CHECK(e.value == 1.0);
    CHECK(e.truncation_bound == 0.0);

    CountSeries two;
    two.source = {{0, 0}};
    two.k_max = 2;
    two.coeffs = {1, 3};
    auto z = series_eval_alternating(two, 0.0);
    CHECK(z.value == 0.0);
    CHECK(z.truncation_bound == 0.0);

    try {
        series_eval_alternating(s, 0.5);
        FAIL("expected an error");
    } catch (const Error &err) {
        CHECK(err.code() == Errc::divergent_bound);
    }
}

TEST_CASE("growth ratio stays below the sanity ceiling")
{
    for (const Lattice &l : {Lattice::lr({0, 1, 4}), Lattice::triangular(), Lattice::tn(3)}) {
        const auto s = enumerate_counts(l, std::vector<Vertex>{{0, 0}}, 10);
        CHECK(growth_ratio(s) <= static_cast<double>(l.outdegree()) * std::exp(1.0) * 4.0);
    }
}
