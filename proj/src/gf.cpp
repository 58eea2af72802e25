#include "dagas/gf.hpp"

#include "dagas/error.hpp"
#include "dagas/gas.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <thread>
#include <type_traits>

namespace dagas {

namespace {

int floor_mod(int a, int m)
{
    const int r = a % m;
    return r < 0 ? r + m : r;
}

void require_increasing(std::span<const int> positions)
{
    if (positions.empty()) {
        throw Error(Errc::invalid_argument, "source", "source needs at least one position");
    }
    for (std::size_t i = 1; i < positions.size(); ++i) {
        if (positions[i] <= positions[i - 1]) {
            throw Error(Errc::invalid_argument, "source", "source positions must be strictly increasing");
        }
    }
}

} // namespace

LineSource LineSource::lr(std::vector<int> offsets, std::vector<int> positions)
{
    LineSource s;
    s.chain = Chain::lr_line;
    s.offsets = TransferFamily::lr(std::move(offsets)).offsets;
    s.positions = std::move(positions);
    return s;
}

LineSource LineSource::tri_mixed(std::vector<int> positions)
{
    LineSource s;
    s.chain = Chain::tri_mixed;
    s.positions = std::move(positions);
    return s;
}

LineSource LineSource::tri_line(std::vector<int> positions)
{
    LineSource s;
    s.chain = Chain::tri_line;
    s.positions = std::move(positions);
    return s;
}

LineSource LineSource::tn(int n, std::vector<int> positions)
{
    LineSource s;
    s.chain = Chain::tn_line;
    s.n = TransferFamily::tn(n).n;
    s.positions = std::move(positions);
    return s;
}

LineSource LineSource::parse(std::string_view chain, std::vector<int> positions)
{
    if (chain == "TriMixed" || chain == "TriPair") {
        return tri_mixed(std::move(positions));
    }
    if (chain == "TriLine") {
        return tri_line(std::move(positions));
    }
    const TransferFamily f = TransferFamily::parse(chain);
    if (f.kind == TransferFamily::Kind::lr) {
        return lr(f.offsets, std::move(positions));
    }
    return tn(f.n, std::move(positions));
}

TransferFamily LineSource::family() const
{
    switch (chain) {
    case Chain::lr_line: return TransferFamily::lr(offsets);
    case Chain::tri_mixed: return TransferFamily::tri_pair();
    case Chain::tri_line: return TransferFamily::tri_line();
    case Chain::tn_line: return TransferFamily::tn(n);
    }
    return TransferFamily::tri_line();
}

Lattice LineSource::lattice() const
{
    switch (chain) {
    case Chain::lr_line: return Lattice::lr(offsets);
    case Chain::tn_line: return Lattice::tn(n);
    default: return Lattice::triangular();
    }
}

Vertex LineSource::vertex_at(int position) const
{
    switch (chain) {
    case Chain::tri_mixed: return {position, floor_mod(position, 2)};
    case Chain::tri_line: return {2 * static_cast<std::int64_t>(position), 0};
    case Chain::tn_line: return {(n % 2 == 0 ? 2 : 1) * static_cast<std::int64_t>(position), 0};
    case Chain::lr_line: break;
    }
    return {position, 0};
}

std::vector<Vertex> LineSource::vertices() const
{
    std::vector<Vertex> out;
    for (int x : positions) {
        out.push_back(vertex_at(x));
    }
    return out;
}

std::string LineSource::chain_name() const
{
    switch (chain) {
    case Chain::tri_mixed: return "TriMixed";
    case Chain::tri_line: return "TriLine";
    default: return family().to_string();
    }
}

void LineSource::validate() const
{
    require_increasing(positions);
    if (chain == Chain::lr_line) {
        const int top = offsets.back();
        for (int r : offsets) {
            if (!std::binary_search(offsets.begin(), offsets.end(), top - r)) {
                throw Error(Errc::invalid_family_parameter, "lattice",
                            "the line of an LR lattice is a chain only for symmetric offsets (R = max(R) - R)");
            }
        }
    }
    const std::vector<Vertex> v = vertices();
    if (!is_free_set(lattice(), v)) {
        throw Error(Errc::not_a_free_set, "source", "source contains an ancestor of another source vertex");
    }
}

double line_source_prob(const ChainSpec &chain, int window, std::span<const int> positions)
{
    validate(chain);
    if (window < 1 || window > 20 || chain.states() != (std::size_t{1} << window)) {
        throw Error(Errc::invalid_argument, "window", "chain must have 2^window states");
    }
    require_increasing(positions);
    const auto states = static_cast<Eigen::Index>(chain.states());
    auto occupy = [&](Eigen::RowVectorXd &v) {
        for (Eigen::Index s = 0; s < states; s += 2) {
            v(s) = 0.0;
        }
    };
    Eigen::RowVectorXd v = chain.initial.transpose();
    occupy(v);
    std::size_t next = 1;
    for (int x = positions.front() + 1; x <= positions.back(); ++x) {
        v = v * chain.transition;
        if (x == positions[next]) {
            occupy(v);
            ++next;
        }
    }
    const double prob = v.sum();
    if (!(prob > 0.0)) {
        throw Error(Errc::inconsistent_source, "source", "the chain gives probability zero to this source");
    }
    return prob;
}

double line_source_prob(const LineSource &source, double p)
{
    source.validate();
    check_subcritical(source.lattice(), p, false);
    const TransferMatrix v = build_transfer(source.family(), p);
    return line_source_prob(limit_chain(v), v.window, source.positions);
}

double gf_value(const LineSource &source, double p)
{
    const double prob = line_source_prob(source, p);
    return source.positions.size() % 2 == 0 ? prob : -prob;
}

CompactSum compact_source_sum(double p, int terms)
{
    if (terms < 1) {
        throw Error(Errc::invalid_argument, "terms", "need at least one term");
    }
    check_subcritical(Lattice::triangular(), p, false);
    const TransferMatrix v = build_transfer(TransferFamily::tri_line(), p);
    const ChainSpec chain = limit_chain(v);
    CompactSum out;
    out.p = p;
    out.terms = terms;
    out.ratio = chain.transition(1, 1);
    std::vector<int> positions;
    double mass = 0.0;
    for (int n = 1; n <= terms; ++n) {
        positions.push_back(n - 1);
        const double prob = line_source_prob(chain, 1, positions);
        out.partial += n % 2 == 0 ? prob : -prob;
        mass += prob;
    }
    out.rounding_bound = (terms + 16) * std::numeric_limits<double>::epsilon() * (mass + 1.0);
    // P(S_n) = nu(1) q^(n-1) with q the occupied-to-occupied probability.
    out.tail_bound = chain.initial(1) * std::pow(out.ratio, terms) / (1.0 - out.ratio);
    return out;
}

Series gf_series(const Lattice &lattice, std::span<const Vertex> source, int area)
{
    const CountSeries counts = enumerate_counts(lattice, source, area);
    std::vector<Rational> c;
    for (const BigInt &a : counts.coeffs) {
        c.emplace_back(a);
    }
    return Series::from_coefficients(counts.s0(), std::move(c), area + 1);
}

Series occupation_series(const Lattice &lattice, std::span<const Vertex> cells, int area)
{
    if (cells.empty()) {
        return Series(1);
    }
    if (!is_free_set(lattice, cells)) {
        for (const Vertex &u : cells) {
            for (const Vertex &c : lattice.children(u)) {
                if (std::find(cells.begin(), cells.end(), c) != cells.end()) {
                    return Series(0);
                }
            }
        }
        throw Error(Errc::not_a_free_set, "cells", "occupation of a non-free set without an edge is not supported");
    }
    const CountSeries counts = enumerate_counts(lattice, cells, area);
    std::vector<Rational> c;
    for (std::size_t i = 0; i < counts.coeffs.size(); ++i) {
        const Rational a(counts.coeffs[i]);
        c.push_back(i % 2 == 0 ? a : Rational(-a));
    }
    return Series::from_coefficients(counts.s0(), std::move(c), area + 1);
}

std::string_view to_string(Status s) noexcept
{
    switch (s) {
    case Status::untested: return "UNTESTED";
    case Status::pass: return "PASS";
    case Status::corrected: return "CORRECTED";
    case Status::fail: return "FAIL";
    }
    return "UNTESTED";
}

namespace {

// ---- closed forms, generic over double and Series ----

template <typename T>
T root(const T &x)
{
    using std::sqrt;
    return sqrt(x);
}

// Dominant eigenvalue of the zigzag chain.
template <typename T>
T mixed_lambda(const T &p)
{
    return (T(1) + root(T(1) + T(4) * p)) / T(2);
}

// Dominant eigenvalue of the single-line chain.
template <typename T>
T line_lambda(const T &p)
{
    return (T(1) + T(2) * p + root(T(1) + T(4) * p)) / T(2);
}

template <typename T>
T l3_lambda(const T &p)
{
    return (T(1) + root(T(1) + T(4) * p - T(4) * p * p)) / T(2);
}

// Printed line-chain rates: empty -> occupied and occupied -> empty.
template <typename T>
T rate_in(const T &p)
{
    return T(2) * p / (T(1) + root(T(1) + T(4) * p));
}

template <typename T>
T rate_out(const T &p)
{
    return (T(1) + root(T(1) + T(4) * p)) / T(2);
}

template <typename T>
T signed_by_size(const T &x, std::size_t size)
{
    return size % 2 == 0 ? x : T(-x);
}

std::vector<int> gaps(const std::vector<int> &positions)
{
    std::vector<int> d;
    for (std::size_t i = 1; i < positions.size(); ++i) {
        d.push_back(positions[i] - positions[i - 1]);
    }
    return d;
}

std::vector<int> compact(int n)
{
    std::vector<int> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = i;
    }
    return out;
}

// ---- oracles ----

// G_S(-p) as a series in p from brute-force counts.
Series gf_series_at_minus_p(const LineSource &s, int area)
{
    const std::vector<Vertex> v = s.vertices();
    return signed_by_size(occupation_series(s.lattice(), v, area), v.size());
}

// Law of a window pattern (bits[0] at position 0) by inclusion-exclusion
// over the occupation series of its supersets.
Series pattern_series(const LineSource &kind, const std::vector<int> &bits, int area,
                      std::map<unsigned, Series> &cache)
{
    const int len = static_cast<int>(bits.size());
    unsigned ones = 0;
    for (int i = 0; i < len; ++i) {
        if (bits[static_cast<std::size_t>(i)]) {
            ones |= 1u << i;
        }
    }
    Series total(0);
    for (unsigned u = 0; u < (1u << len); ++u) {
        if ((u & ones) != ones) {
            continue;
        }
        auto it = cache.find(u);
        if (it == cache.end()) {
            std::vector<Vertex> cells;
            for (int i = 0; i < len; ++i) {
                if (u & (1u << i)) {
                    cells.push_back(kind.vertex_at(i));
                }
            }
            it = cache.emplace(u, occupation_series(kind.lattice(), cells, area)).first;
        }
        const int extra = std::popcount(u) - std::popcount(ones);
        total += extra % 2 == 0 ? it->second : -it->second;
    }
    return total;
}

std::vector<int> window_bits(unsigned state, int window)
{
    std::vector<int> bits(static_cast<std::size_t>(window));
    for (int i = 0; i < window; ++i) {
        bits[static_cast<std::size_t>(i)] = (state >> (window - 1 - i)) & 1u;
    }
    return bits;
}

std::vector<Series> stationary_series(const LineSource &kind, int area)
{
    const int m = kind.family().window();
    std::map<unsigned, Series> cache;
    std::vector<Series> out;
    for (unsigned a = 0; a < (1u << m); ++a) {
        out.push_back(pattern_series(kind, window_bits(a, m), area, cache));
    }
    return out;
}

std::vector<Series> transition_series(const LineSource &kind, int area)
{
    const int m = kind.family().window();
    const unsigned states = 1u << m;
    const unsigned keep = (states >> 1) - 1;
    std::map<unsigned, Series> cache;
    std::vector<Series> out;
    for (unsigned a = 0; a < states; ++a) {
        const Series from = pattern_series(kind, window_bits(a, m), area, cache);
        for (unsigned b = 0; b < states; ++b) {
            if (((a & keep) << 1) != (b & ~1u)) {
                out.emplace_back(0);
                continue;
            }
            std::vector<int> bits = window_bits(a, m);
            bits.push_back(static_cast<int>(b & 1u));
            out.push_back(pattern_series(kind, bits, area, cache) / from);
        }
    }
    return out;
}

ChainSpec chain_at(const LineSource &kind, double p)
{
    check_subcritical(kind.lattice(), p, false);
    return limit_chain(build_transfer(kind.family(), p));
}

std::vector<double> chain_transition(const LineSource &kind, double p)
{
    const ChainSpec c = chain_at(kind, p);
    std::vector<double> out;
    for (Eigen::Index i = 0; i < c.transition.rows(); ++i) {
        for (Eigen::Index j = 0; j < c.transition.cols(); ++j) {
            out.push_back(c.transition(i, j));
        }
    }
    return out;
}

std::vector<double> chain_stationary(const LineSource &kind, double p)
{
    const ChainSpec c = chain_at(kind, p);
    return {c.initial.data(), c.initial.data() + c.initial.size()};
}

// ---- variant builders ----

using SeriesOracle = std::function<std::vector<Series>(int)>;
using ChainOracle = std::function<std::vector<double>(double)>;

constexpr int precision_margin = 8;

template <typename A, typename B>
std::vector<A> difference(const std::vector<A> &got, const std::vector<B> &expected)
{
    if (got.size() != expected.size()) {
        throw Error(Errc::invalid_argument, "formula", "formula and oracle have different shapes");
    }
    std::vector<A> out;
    for (std::size_t i = 0; i < got.size(); ++i) {
        out.push_back(got[i] - expected[i]);
    }
    return out;
}

// `formula(x)` returns the components of the closed form at x. The chain
// oracle is compared with formula(sign * p): sign -1 for forms in t = -p.
template <typename F>
FormulaVariant closed_form(std::string name, std::string description, bool printed, F formula,
                           SeriesOracle series, ChainOracle chain, double sign = 1.0)
{
    FormulaVariant v;
    v.name = std::move(name);
    v.description = std::move(description);
    v.printed = printed;
    v.series_residual = [formula, series](int area) {
        return difference(formula(Series::variable(area + 1 + precision_margin)), series(area));
    };
    v.chain_residual = [formula, chain, sign](double p) { return difference(formula(sign * p), chain(p)); };
    return v;
}

// Algebraic identity R(t, G) = 0 for the single-source GF of LR{0..n-1}.
template <typename F>
FormulaVariant identity(std::string name, std::string description, bool printed, F residual, int n)
{
    FormulaVariant v;
    v.name = std::move(name);
    v.description = std::move(description);
    v.printed = printed;
    const LineSource single = LineSource::lr(compact(n), {0});
    v.series_residual = [residual, single](int area) {
        const std::vector<Vertex> s = single.vertices();
        const Series g = gf_series(single.lattice(), s, area);
        return std::vector<Series>{residual(Series::variable(area + 1 + precision_margin), g)};
    };
    v.chain_residual = [residual, single](double p) {
        return std::vector<double>{residual(-p, gf_value(single, p))};
    };
    return v;
}

FormulaEntry algebraic_entry(int n)
{
    FormulaEntry e;
    e.id = "ln-algebraic-n" + std::to_string(n);
    e.title = "single-source GF G of LR{0.." + std::to_string(n - 1) + "} solves the degree-" +
              std::to_string(n + 1) + " algebraic equation";
    e.applicability = "t = -p, 0 < p < 1/" + std::to_string(n);
    e.variable = "t";
    e.variants.push_back(identity(
        "printed", "t^2 (1+t)^(n-1) [1+(n+1)G]^(n+1) - [1+t+(n-1)G]^(n-1) (t - 2G^2)", true,
        [n](const auto &t, const auto &g) {
            using T = std::decay_t<decltype(t)>;
            return power(T(1) + t, n - 1) * t * t * power(T(1) + T(n + 1) * g, n + 1) -
                   power(T(1) + t + T(n - 1) * g, n - 1) * (t - T(2) * g * g);
        },
        n));
    e.variants.push_back(identity(
        "squared-last-factor", "last factor read as (t - 2G)^2", false,
        [n](const auto &t, const auto &g) {
            using T = std::decay_t<decltype(t)>;
            return power(T(1) + t, n - 1) * t * t * power(T(1) + T(n + 1) * g, n + 1) -
                   power(T(1) + t + T(n - 1) * g, n - 1) * (t - T(2) * g) * (t - T(2) * g);
        },
        n));
    return e;
}

FormulaEntry l3_transition_entry()
{
    const LineSource kind = LineSource::lr({0, 1, 2}, {0});
    SeriesOracle series = [kind](int area) { return transition_series(kind, area); };
    ChainOracle chain = [kind](double p) { return chain_transition(kind, p); };
    auto matrix = [](auto row01_stay, auto row10_reset) {
        return [row01_stay, row10_reset](const auto &p) {
            using T = std::decay_t<decltype(p)>;
            const T l = l3_lambda(p);
            const T z(0);
            const T a = row01_stay(p, l);
            const T b = row10_reset(p, l);
            return std::vector<T>{T(1) / l, T(1) - T(1) / l, z, z,         //
                                  z, z, a, T(1) - a,                       //
                                  b, T(1) - b, z, z,                       //
                                  z, z, T(1) - p / l, p / l};
        };
    };
    auto printed_alpha = [](const auto &p, const auto &l) {
        using T = std::decay_t<decltype(p)>;
        return (T(1) - p) * (T(1) - p) * p / ((T(2) - p - l) * l);
    };
    FormulaEntry e;
    e.id = "l3-transition";
    e.title = "transition matrix of the window-2 line chain of LR{0,1,2}";
    e.applicability = "0 < p < 1/3";
    e.variable = "p";
    e.variants.push_back(closed_form(
        "printed", "row 01 = [1 - p/(2 lambda), p/(2 lambda)], row 10 = [alpha, 1 - alpha]", true,
        matrix([](const auto &p, const auto &l) { return 1 - p / (2 * l); }, printed_alpha), series, chain));
    e.variants.push_back(closed_form(
        "grouping-(1-p)/(2lambda)", "row 01 entry read as (1 - p)/(2 lambda)", false,
        [printed_alpha](const auto &p) {
            using T = std::decay_t<decltype(p)>;
            const T l = l3_lambda(p);
            const T z(0);
            const T a = printed_alpha(p, l);
            return std::vector<T>{T(1) / l, T(1) - T(1) / l, z, z, z, z, (T(1) - p) / (T(2) * l), p / (T(2) * l),
                                  a, T(1) - a, z, z, z, z, T(1) - p / l, p / l};
        },
        series, chain));
    e.variants.push_back(closed_form(
        "rows-from-eigenvectors", "row 01 = [1 - p/lambda, p/lambda], row 10 = [(1-p)/(lambda-p), ...]", false,
        matrix([](const auto &p, const auto &l) { return 1 - p / l; },
               [](const auto &p, const auto &l) { return (1 - p) / (l - p); }),
        series, chain));
    return e;
}

FormulaEntry l3_compact_entry(int k)
{
    const LineSource source = LineSource::lr({0, 1, 2}, compact(k));
    SeriesOracle series = [source](int area) {
        const std::vector<Vertex> s = source.vertices();
        return std::vector<Series>{gf_series(source.lattice(), s, area)};
    };
    ChainOracle chain = [source](double p) { return std::vector<double>{gf_value(source, p)}; };
    FormulaEntry e;
    e.id = "l3-compact-k" + std::to_string(k);
    e.title = "GF of animals on LR{0,1,2} with a compact source of size " + std::to_string(k);
    e.applicability = "t = -p, 0 < p < 1/3";
    e.variable = "t";
    e.variants.push_back(closed_form(
        "printed", "(1 - t s)/(D + (1+2t) s) * (-2t/(1+s))^(k-1), D = 1-4t-4t^2, s = sqrt(D)", true,
        [k](const auto &t) {
            using T = std::decay_t<decltype(t)>;
            const T d = T(1) - T(4) * t - T(4) * t * t;
            const T s = root(d);
            return std::vector<T>{(T(1) - t * s) / (d + (T(1) + T(2) * t) * s) *
                                  power(T(-2) * t / (T(1) + s), k - 1)};
        },
        series, chain, -1.0));
    e.variants.push_back(closed_form(
        "chain-derived", "t (1+s)/(D + (1-2t) s) * (2t/(1+s))^(k-1)", false,
        [k](const auto &t) {
            using T = std::decay_t<decltype(t)>;
            const T d = T(1) - T(4) * t - T(4) * t * t;
            const T s = root(d);
            return std::vector<T>{t * (T(1) + s) / (d + (T(1) - T(2) * t) * s) * power(T(2) * t / (T(1) + s), k - 1)};
        },
        series, chain, -1.0));
    return e;
}

FormulaEntry mixed_transition_entry()
{
    const LineSource kind = LineSource::tri_mixed({0});
    FormulaEntry e;
    e.id = "tri-mixed-transition";
    e.title = "transition matrix of the zigzag chain X(i, i mod 2) on the triangular lattice";
    e.applicability = "0 < p < 1/3";
    e.variable = "p";
    e.variants.push_back(closed_form(
        "printed", "[[1/lambda, p/lambda^2], [1, 0]], lambda = (1 + sqrt(1+4p))/2", true,
        [](const auto &p) {
            using T = std::decay_t<decltype(p)>;
            const T l = mixed_lambda(p);
            return std::vector<T>{T(1) / l, p / (l * l), T(1), T(0)};
        },
        [kind](int area) { return transition_series(kind, area); },
        [kind](double p) { return chain_transition(kind, p); }));
    return e;
}

FormulaEntry mixed_stationary_entry()
{
    const LineSource kind = LineSource::tri_mixed({0});
    FormulaEntry e;
    e.id = "tri-mixed-stationary";
    e.title = "stationary law of the zigzag chain on the triangular lattice";
    e.applicability = "0 < p < 1/3";
    e.variable = "p";
    e.variants.push_back(closed_form(
        "printed", "[lambda^2/(p+lambda^2), p/(p+lambda^2)]", true,
        [](const auto &p) {
            using T = std::decay_t<decltype(p)>;
            const T l2 = mixed_lambda(p) * mixed_lambda(p);
            return std::vector<T>{l2 / (p + l2), p / (p + l2)};
        },
        [kind](int area) { return stationary_series(kind, area); },
        [kind](double p) { return chain_stationary(kind, p); }));
    return e;
}

FormulaEntry line_transition_entry()
{
    const LineSource kind = LineSource::tri_line({0});
    SeriesOracle series = [kind](int area) { return transition_series(kind, area); };
    ChainOracle chain = [kind](double p) { return chain_transition(kind, p); };
    FormulaEntry e;
    e.id = "tri-line-transition";
    e.title = "transition matrix of the chain X(2i, 0) on a triangular line";
    e.applicability = "0 < p < 1/3";
    e.variable = "p";
    e.variants.push_back(closed_form(
        "printed", "[[1 - a_in, a_in], [a_out, 1 - a_out]], a_in = 2p/(1+sqrt(1+4p)), a_out = (1+sqrt(1+4p))/2",
        true,
        [](const auto &p) {
            using T = std::decay_t<decltype(p)>;
            const T a = rate_in(p);
            const T b = rate_out(p);
            return std::vector<T>{T(1) - a, a, b, T(1) - b};
        },
        series, chain));
    e.variants.push_back(closed_form(
        "rates-over-lambda", "rates divided by lambda = (1 + 2p + sqrt(1+4p))/2", false,
        [](const auto &p) {
            using T = std::decay_t<decltype(p)>;
            const T l = line_lambda(p);
            const T a = rate_in(p) / l;
            const T b = rate_out(p) / l;
            return std::vector<T>{T(1) - a, a, b, T(1) - b};
        },
        series, chain));
    return e;
}

FormulaEntry line_stationary_entry()
{
    const LineSource kind = LineSource::tri_line({0});
    FormulaEntry e;
    e.id = "tri-line-stationary";
    e.title = "stationary law of the chain X(2i, 0) on a triangular line";
    e.applicability = "0 < p < 1/3";
    e.variable = "p";
    e.variants.push_back(closed_form(
        "printed", "[a_out/(a_in+a_out), a_in/(a_in+a_out)]", true,
        [](const auto &p) {
            using T = std::decay_t<decltype(p)>;
            const T a = rate_in(p);
            const T b = rate_out(p);
            return std::vector<T>{b / (a + b), a / (a + b)};
        },
        [kind](int area) { return stationary_series(kind, area); },
        [kind](double p) { return chain_stationary(kind, p); }));
    return e;
}

template <typename T>
T mixed_source_form(const T &alpha, const std::vector<int> &positions, bool reciprocal_prefactor)
{
    T value = reciprocal_prefactor ? T(1) / (T(1) + alpha) : alpha / (T(1) + alpha);
    for (int d : gaps(positions)) {
        value = value * (power(T(-alpha), d) + alpha) / (T(1) + alpha);
    }
    return signed_by_size(value, positions.size());
}

SeriesOracle source_series(std::vector<LineSource> sources)
{
    return [sources](int area) {
        std::vector<Series> out;
        for (const LineSource &s : sources) {
            out.push_back(gf_series_at_minus_p(s, area));
        }
        return out;
    };
}

ChainOracle source_chain(std::vector<LineSource> sources)
{
    return [sources](double p) {
        std::vector<double> out;
        for (const LineSource &s : sources) {
            out.push_back(gf_value(s, p));
        }
        return out;
    };
}

// Series checks use small sources; chain checks add longer ones.
template <typename F>
FormulaVariant source_form(std::string name, std::string description, bool printed,
                           const std::vector<std::vector<int>> &series_sets,
                           const std::vector<std::vector<int>> &chain_sets, LineSource (*make)(std::vector<int>),
                           F form)
{
    std::vector<LineSource> s;
    std::vector<LineSource> c;
    for (const auto &pos : series_sets) {
        s.push_back(make(pos));
    }
    for (const auto &pos : chain_sets) {
        c.push_back(make(pos));
    }
    auto formula = [form, series_sets, chain_sets](const auto &p) {
        using T = std::decay_t<decltype(p)>;
        const auto &sets = std::is_same_v<T, Series> ? series_sets : chain_sets;
        std::vector<T> out;
        for (const auto &pos : sets) {
            out.push_back(form(p, pos));
        }
        return out;
    };
    return closed_form(std::move(name), std::move(description), printed, formula, source_series(s), source_chain(c));
}

FormulaEntry mixed_sources_entry()
{
    const std::vector<std::vector<int>> series_sets{{0}, {0, 2}, {0, 3}, {0, 2, 5}};
    const std::vector<std::vector<int>> chain_sets{{0}, {0, 2}, {0, 3}, {0, 2, 5}, {0, 4, 7, 9}, {0, 12}};
    auto printed_alpha = [](const auto &p) {
        using T = std::decay_t<decltype(p)>;
        const T q = p * p;
        return (T(1) + T(2) * q + root(T(1) + T(4) * q)) / (T(2) * q);
    };
    FormulaEntry e;
    e.id = "tri-mixed-sources";
    e.title = "GF of animals on the triangular lattice with sources (x_i, x_i mod 2), gaps >= 2";
    e.applicability = "0 < p < 1/3";
    e.variable = "p";
    e.variants.push_back(source_form(
        "printed", "alpha/(1+alpha) prod ((-alpha)^d + alpha)/(1+alpha), alpha = (1+2p^2+sqrt(1+4p^2))/(2p^2)", true,
        series_sets, chain_sets, &LineSource::tri_mixed,
        [printed_alpha](const auto &p, const std::vector<int> &pos) {
            return mixed_source_form(printed_alpha(p), pos, false);
        }));
    e.variants.push_back(source_form(
        "reciprocal-prefactor", "prefactor 1/(1+alpha) with the printed alpha", false, series_sets, chain_sets,
        &LineSource::tri_mixed, [printed_alpha](const auto &p, const std::vector<int> &pos) {
            return mixed_source_form(printed_alpha(p), pos, true);
        }));
    e.variants.push_back(source_form(
        "reciprocal-alpha", "alpha replaced by 1/alpha", false, series_sets, chain_sets, &LineSource::tri_mixed,
        [printed_alpha](const auto &p, const std::vector<int> &pos) {
            using T = std::decay_t<decltype(p)>;
            return mixed_source_form(T(T(1) / printed_alpha(p)), pos, false);
        }));
    e.variants.push_back(source_form(
        "alpha-from-zigzag-chain", "alpha = p/lambda^2 = 2p/(1+2p+sqrt(1+4p)), the zigzag chain's second eigenvalue",
        false, series_sets, chain_sets, &LineSource::tri_mixed, [](const auto &p, const std::vector<int> &pos) {
            using T = std::decay_t<decltype(p)>;
            const T l = mixed_lambda(p);
            return mixed_source_form(T(p / (l * l)), pos, false);
        }));
    return e;
}

template <typename T>
T line_source_form(const T &p, const std::vector<int> &positions, bool over_lambda)
{
    const T a = rate_in(p);
    const T b = rate_out(p);
    const T mu = over_lambda ? T(T(1) - (a + b) / line_lambda(p)) : T(T(1) - a - b);
    T value = a / (a + b);
    for (int d : gaps(positions)) {
        value = value * (b * power(mu, d) + a) / (a + b);
    }
    return signed_by_size(value, positions.size());
}

FormulaEntry line_sources_entry()
{
    const std::vector<std::vector<int>> series_sets{{0}, {0, 1}, {0, 2}, {0, 1, 3}};
    const std::vector<std::vector<int>> chain_sets{{0}, {0, 1}, {0, 2}, {0, 1, 3}, {0, 3, 4, 8}, {0, 15}};
    FormulaEntry e;
    e.id = "tri-line-sources";
    e.title = "GF of animals on the triangular lattice with sources (2x_i, 0)";
    e.applicability = "0 < p < 1/3";
    e.variable = "p";
    e.variants.push_back(source_form(
        "printed", "a_in/(a_in+a_out) prod (a_out (1-a_out-a_in)^d + a_in)/(a_in+a_out)", true, series_sets,
        chain_sets, &LineSource::tri_line,
        [](const auto &p, const std::vector<int> &pos) { return line_source_form(p, pos, false); }));
    e.variants.push_back(source_form(
        "rates-over-lambda", "(1 - (a_in+a_out)/lambda)^d, lambda = (1+2p+sqrt(1+4p))/2", false, series_sets,
        chain_sets, &LineSource::tri_line,
        [](const auto &p, const std::vector<int> &pos) { return line_source_form(p, pos, true); }));
    return e;
}

template <typename T>
T compact_form(const T &p, int n, bool over_lambda)
{
    const T a = rate_in(p);
    const T b = rate_out(p);
    const T stay = over_lambda ? T(T(1) - b / line_lambda(p)) : T(T(1) - b);
    return signed_by_size(T(a / (a + b) * power(stay, n - 1)), static_cast<std::size_t>(n));
}

FormulaEntry compact_sources_entry()
{
    const std::vector<std::vector<int>> series_sets{compact(1), compact(2), compact(3), compact(4)};
    const std::vector<std::vector<int>> chain_sets{compact(1), compact(2), compact(3), compact(5), compact(8)};
    FormulaEntry e;
    e.id = "tri-compact-sources";
    e.title = "GF of animals on the triangular lattice with n consecutive sources on a line";
    e.applicability = "0 < p < 1/3";
    e.variable = "p";
    e.variants.push_back(source_form(
        "printed", "(-1)^n a_in/(a_in+a_out) (1 - a_out)^(n-1)", true, series_sets, chain_sets,
        &LineSource::tri_line, [](const auto &p, const std::vector<int> &pos) {
            return compact_form(p, static_cast<int>(pos.size()), false);
        }));
    e.variants.push_back(source_form(
        "rates-over-lambda", "(1 - a_out/lambda)^(n-1)", false, series_sets, chain_sets, &LineSource::tri_line,
        [](const auto &p, const std::vector<int> &pos) {
            return compact_form(p, static_cast<int>(pos.size()), true);
        }));
    return e;
}

FormulaEntry compact_sum_entry()
{
    FormulaVariant v;
    v.name = "printed";
    v.description = "sum over n >= 1 of G_{S_n}(-p) = -p/(1+4p)";
    v.printed = true;
    v.series_residual = [](int area) {
        Series total(0);
        for (int n = 1; n <= area; ++n) {
            total += gf_series_at_minus_p(LineSource::tri_line(compact(n)), area);
        }
        const Series p = Series::variable(area + 1 + precision_margin);
        return std::vector<Series>{-p / (1 + 4 * p) - total};
    };
    v.chain_residual = [](double p) {
        const CompactSum sum = compact_source_sum(p, 30);
        const double gap = std::abs(sum.partial + p / (1.0 + 4.0 * p));
        return std::vector<double>{std::max(0.0, gap - sum.tail_bound - sum.rounding_bound)};
    };
    FormulaEntry e;
    e.id = "tri-compact-sum";
    e.title = "sum of the compact-source GFs on a triangular line";
    e.applicability = "0 < p < 1/3; chain check sums 30 terms and subtracts the geometric tail bound";
    e.variable = "p";
    e.variants.push_back(std::move(v));
    return e;
}

std::vector<FormulaEntry> build_registry()
{
    return {algebraic_entry(2),       algebraic_entry(3),       l3_transition_entry(),
            l3_compact_entry(2),      l3_compact_entry(3),      mixed_transition_entry(),
            mixed_stationary_entry(), line_transition_entry(),  line_stationary_entry(),
            mixed_sources_entry(),    line_sources_entry(),     compact_sources_entry(),
            compact_sum_entry()};
}

SeriesCheck check_series(const FormulaVariant &v, const AdjudicationOptions &o)
{
    SeriesCheck out;
    const std::vector<Series> residuals = v.series_residual(o.area);
    int prec = Series::exact;
    for (const Series &r : residuals) {
        prec = std::min(prec, r.precision());
        if (!r.is_zero() && (!out.first_mismatch || r.valuation() < *out.first_mismatch)) {
            out.first_mismatch = r.valuation();
            out.leading_residual = r.coefficient(r.valuation()).str();
        }
    }
    out.trusted_order = prec - 1;
    out.agrees = !out.first_mismatch && out.trusted_order >= o.min_trusted_order;
    return out;
}

} // namespace

const std::vector<FormulaEntry> &formula_registry()
{
    static const std::vector<FormulaEntry> registry = build_registry();
    return registry;
}

const FormulaEntry &find_formula(std::string_view id)
{
    const std::string_view key = id == "prop1ii-sum" ? std::string_view("tri-compact-sum") : id;
    for (const FormulaEntry &e : formula_registry()) {
        if (e.id == key) {
            return e;
        }
    }
    throw Error(Errc::invalid_argument, "entry", "unknown registry entry '" + std::string(id) + "'");
}

AdjudicationReport adjudicate(const FormulaEntry &entry, const AdjudicationOptions &options)
{
    AdjudicationReport report;
    report.id = entry.id;
    report.title = entry.title;
    report.applicability = entry.applicability;
    report.variable = entry.variable;
    report.options = options;
    bool printed_agrees = false;
    bool variant_agrees = false;
    for (const FormulaVariant &v : entry.variants) {
        VariantReport r;
        r.name = v.name;
        r.description = v.description;
        r.printed = v.printed;
        try {
            r.series = check_series(v, options);
            bool chain_ok = !options.p_grid.empty();
            for (double p : options.p_grid) {
                PointCheck c;
                c.p = p;
                for (double x : v.chain_residual(p)) {
                    c.residual = std::max(c.residual, std::isfinite(x) ? std::abs(x) : INFINITY);
                }
                c.agrees = c.residual <= options.tolerance;
                chain_ok = chain_ok && c.agrees;
                r.chain.push_back(c);
            }
            r.agrees = r.series.agrees && chain_ok;
        } catch (const std::exception &ex) {
            r.error = ex.what();
            r.agrees = false;
        }
        (v.printed ? printed_agrees : variant_agrees) |= r.agrees;
        report.variants.push_back(std::move(r));
    }
    report.status = printed_agrees ? Status::pass : variant_agrees ? Status::corrected : Status::fail;
    return report;
}

std::vector<AdjudicationReport> adjudicate_all(const AdjudicationOptions &options, unsigned threads)
{
    const auto &entries = formula_registry();
    std::vector<AdjudicationReport> out(entries.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < entries.size(); i = next++) {
            out[i] = adjudicate(entries[i], options);
        }
    };
    const unsigned workers =
        std::min<unsigned>(threads ? threads : default_thread_count(), static_cast<unsigned>(entries.size()));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
        for (auto &t : pool) {
            t.join();
        }
    }
    return out;
}

} // namespace dagas
