#include "dagas/transfer.hpp"

#include "dagas/error.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>

namespace dagas {

TransferFamily TransferFamily::lr(std::vector<int> offsets)
{
    std::sort(offsets.begin(), offsets.end());
    offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());
    if (offsets.size() < 2 || offsets.front() != 0) {
        throw Error(Errc::invalid_family_parameter, "R", "LR needs offsets with minimum 0 and at least two values");
    }
    if (offsets.back() > 9) {
        throw Error(Errc::invalid_family_parameter, "R", "max(R) above 9 gives more than 512 states");
    }
    return {Kind::lr, std::move(offsets), 0};
}

TransferFamily TransferFamily::tn(int n)
{
    if (n < 2 || n > 10) {
        throw Error(Errc::invalid_family_parameter, "n", "Tn transfer matrices need 2 <= n <= 10");
    }
    return {Kind::tn, {}, n};
}

TransferFamily TransferFamily::parse(std::string_view text)
{
    auto to_int = [&](std::string_view s) {
        int v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
            throw Error(Errc::parse_error, "family", "bad integer in '" + std::string(text) + "'");
        }
        return v;
    };
    if (text == "TriPair") {
        return tri_pair();
    }
    if (text == "TriLine") {
        return tri_line();
    }
    if (text.starts_with("Tn:")) {
        return tn(to_int(text.substr(3)));
    }
    if (text.starts_with("LR:")) {
        std::vector<int> r;
        std::string_view rest = text.substr(3);
        while (true) {
            const auto comma = rest.find(',');
            r.push_back(to_int(rest.substr(0, comma)));
            if (comma == std::string_view::npos) {
                break;
            }
            rest.remove_prefix(comma + 1);
        }
        return lr(std::move(r));
    }
    throw Error(Errc::parse_error, "family", "unknown transfer family '" + std::string(text) + "'");
}

int TransferFamily::window() const noexcept
{
    switch (kind) {
    case Kind::lr: return offsets.back();
    case Kind::tn: return n - 1;
    default: return 1;
    }
}

std::string TransferFamily::to_string() const
{
    switch (kind) {
    case Kind::lr: {
        std::string s = "LR:";
        for (std::size_t k = 0; k < offsets.size(); ++k) {
            s += (k ? "," : "") + std::to_string(offsets[k]);
        }
        return s;
    }
    case Kind::tri_pair: return "TriPair";
    case Kind::tri_line: return "TriLine";
    case Kind::tn: return "Tn:" + std::to_string(n);
    }
    return "";
}

std::string_view to_string(IndexConvention c) noexcept
{
    return c == IndexConvention::zero_based ? "zero-based" : "one-based";
}

namespace {

template <typename S>
std::vector<std::vector<S>> build_values(const TransferFamily &f, const S &p, IndexConvention convention)
{
    const S zero(0);
    const S one(1);
    using Kind = TransferFamily::Kind;
    if (f.kind == Kind::tri_pair) {
        return {{one, p}, {one, zero}};
    }
    if (f.kind == Kind::tri_line) {
        return {{one + p, p}, {one, p}};
    }
    const int m = f.window();
    const unsigned states = 1u << m;
    const unsigned keep = (states >> 1) - 1; // the m - 1 newest bits
    std::vector<std::vector<S>> v(states, std::vector<S>(states, zero));
    for (unsigned a = 0; a < states; ++a) {
        for (unsigned t = 0; t < 2; ++t) {
            const unsigned b = ((a & keep) << 1) | t;
            if (f.kind == Kind::tn) {
                const bool oldest = (a >> (m - 1)) & 1u;
                v[a][b] = oldest ? p : (a == 0 && b == 0 ? one + p : one);
                continue;
            }
            if (t == 1) {
                v[a][b] = p;
                continue;
            }
            bool covered = false;
            for (int r = 0; r < m; ++r) {
                const bool bit = (a >> (m - 1 - r)) & 1u;
                const int label = convention == IndexConvention::zero_based ? r : r + 1;
                if (bit && std::binary_search(f.offsets.begin(), f.offsets.end(), m - label)) {
                    covered = true;
                }
            }
            v[a][b] = covered ? one - p : one;
        }
    }
    return v;
}

int floor_mod(int a, int m)
{
    const int r = a % m;
    return r < 0 ? r + m : r;
}

unsigned rotate(unsigned mask, int shift, int width)
{
    const int s = floor_mod(shift, width);
    const unsigned full = (1u << width) - 1;
    return ((mask << s) | (mask >> (width - s))) & full;
}

// Offsets from a line vertex to the children on the next line, in local
// numbering, and the renumbering of the line after next.
struct LocalGeometry {
    std::vector<int> down;
    int shift = 0;
};

LocalGeometry local_geometry(const TransferFamily &f)
{
    using Kind = TransferFamily::Kind;
    if (f.kind == Kind::tri_pair || f.kind == Kind::tri_line) {
        return {{-1, 0}, -1};
    }
    if (f.kind == Kind::tn) {
        const int k = f.n / 2;
        LocalGeometry g;
        if (f.n % 2 == 1) {
            for (int r = -k; r <= k; ++r) {
                g.down.push_back(r);
            }
            g.shift = 0;
        } else {
            for (int r = -k; r <= k - 1; ++r) {
                g.down.push_back(r);
            }
            g.shift = -1;
        }
        return g;
    }
    return {f.offsets, 0};
}

unsigned spread(unsigned mask, const std::vector<int> &offsets, int sign, int width)
{
    unsigned out = 0;
    for (int o : offsets) {
        out |= rotate(mask, sign * o, width);
    }
    return out;
}

void check_width(const TransferFamily &f, int width, int max_width)
{
    using Kind = TransferFamily::Kind;
    int min_width = 2;
    if (f.kind == Kind::lr) {
        min_width = f.offsets.back() + 1;
    } else if (f.kind == Kind::tn) {
        min_width = f.n;
    }
    if (width < min_width) {
        throw Error(Errc::width_too_small, "N", "width must be at least " + std::to_string(min_width));
    }
    if (width > max_width) {
        throw Error(Errc::width_too_large, "N",
                    "width " + std::to_string(width) + " exceeds the exhaustive limit " + std::to_string(max_width));
    }
}

double trace_power(const Matrix &v, int n, double *log_scale)
{
    const auto power = scaled_power<double>(v, n);
    *log_scale = power.log_scale;
    return power.unit.trace();
}

std::vector<double> normalized(std::vector<double> w, double *total)
{
    double z = 0.0;
    for (double x : w) {
        z += x;
    }
    for (double &x : w) {
        x /= z;
    }
    if (total) {
        *total = z;
    }
    return w;
}

// Product over the cyclic window sequence of a subset.
double window_product(const Matrix &v, unsigned mask, int width, int m)
{
    auto window = [&](int i) {
        unsigned w = 0;
        for (int k = 0; k < m; ++k) {
            w = (w << 1) | ((mask >> floor_mod(i + k, width)) & 1u);
        }
        return w;
    };
    double prod = 1.0;
    unsigned cur = window(0);
    for (int i = 0; i < width; ++i) {
        const unsigned next = window(i + 1);
        prod *= v(cur, next);
        cur = next;
    }
    return prod;
}

double zigzag_product(const Matrix &v, unsigned c, unsigned d, int width)
{
    const int len = 2 * width;
    auto x = [&](int i) {
        i = floor_mod(i, len);
        return i % 2 == 0 ? (c >> (i / 2)) & 1u : (d >> (i / 2)) & 1u;
    };
    double prod = 1.0;
    for (int i = 0; i < len; ++i) {
        prod *= v(x(i), x(i + 1));
    }
    return prod;
}

std::vector<double> closed_line_weights(const TransferFamily &f, int width, double p)
{
    const unsigned subsets = 1u << width;
    std::vector<double> w(subsets);
    if (f.kind == TransferFamily::Kind::lr) {
        for (unsigned c = 0; c < subsets; ++c) {
            const int size = std::popcount(c);
            const int nb = std::popcount(spread(c, f.offsets, 1, width));
            w[c] = std::pow(p / (1 - p), size) * std::pow(1 - p, nb);
        }
        return w;
    }
    const LocalGeometry g = local_geometry(f);
    for (unsigned c = 0; c < subsets; ++c) {
        const int nb = std::popcount(spread(c, g.down, 1, width));
        w[c] = std::pow(p, std::popcount(c)) * std::pow(1 + p, width - nb);
    }
    return w;
}

std::vector<double> closed_pair_weights(const TransferFamily &f, int width, double p)
{
    const LocalGeometry g = local_geometry(f);
    const unsigned subsets = 1u << width;
    std::vector<double> w(static_cast<std::size_t>(subsets) * subsets, 0.0);
    for (unsigned c = 0; c < subsets; ++c) {
        const unsigned below = spread(c, g.down, 1, width);
        for (unsigned d = 0; d < subsets; ++d) {
            if ((below & d) == 0) {
                w[c | (d << width)] = std::pow(p, std::popcount(c) + std::popcount(d));
            }
        }
    }
    return w;
}

LineLaw build_law(const TransferFamily &f, int width, double p, IndexConvention convention)
{
    LineLaw law;
    law.family = f;
    law.width = width;
    law.p = p;
    law.convention = convention;
    const TransferMatrix v = build_transfer(f, p, convention);
    double log_scale = 0.0;
    if (f.kind == TransferFamily::Kind::tri_pair) {
        law.pair = true;
        law.closed = normalized(closed_pair_weights(f, width, p), &law.subset_normalizer);
        const double tr = trace_power(v.values, 2 * width, &log_scale);
        law.trace = tr * std::exp(log_scale);
        const unsigned subsets = 1u << width;
        law.product.resize(law.closed.size());
        for (unsigned c = 0; c < subsets; ++c) {
            for (unsigned d = 0; d < subsets; ++d) {
                law.product[c | (d << width)] = zigzag_product(v.values, c, d, width) / law.trace;
            }
        }
    } else {
        law.closed = normalized(closed_line_weights(f, width, p), &law.subset_normalizer);
        const double tr = trace_power(v.values, width, &log_scale);
        law.trace = tr * std::exp(log_scale);
        law.product.resize(law.closed.size());
        for (unsigned c = 0; c < law.closed.size(); ++c) {
            law.product[c] = window_product(v.values, c, width, v.window) / law.trace;
        }
    }
    for (std::size_t k = 0; k < law.closed.size(); ++k) {
        law.max_difference = std::max(law.max_difference, std::abs(law.closed[k] - law.product[k]));
    }
    return law;
}

double relative_gap(double a, double b)
{
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

// Line recurrence of the LR lattice, written exactly as the layer update
// F_C = (p/(1-p))^{|C|} sum_{D disjoint from N(C)} (1-p)^{N-|Nbar(D)|} F_D.
double lr_line_residual(const TransferFamily &f, int width, double p, const std::vector<double> &law)
{
    const unsigned subsets = 1u << width;
    std::vector<unsigned> forward(subsets);
    std::vector<int> back_size(subsets);
    for (unsigned c = 0; c < subsets; ++c) {
        forward[c] = spread(c, f.offsets, 1, width);
        back_size[c] = std::popcount(spread(c, f.offsets, -1, width));
    }
    double worst = 0.0;
    for (unsigned c = 0; c < subsets; ++c) {
        double sum = 0.0;
        for (unsigned d = 0; d < subsets; ++d) {
            if ((d & forward[c]) == 0) {
                sum += std::pow(1 - p, width - back_size[d]) * law[d];
            }
        }
        worst = std::max(worst, std::abs(law[c] - std::pow(p / (1 - p), std::popcount(c)) * sum));
    }
    return worst;
}

// Two-line recurrence: the law of lines (0, 1) from the law of lines (1, 2).
double pair_residual(const TransferFamily &f, int width, double p, const std::vector<double> &law)
{
    const LocalGeometry g = local_geometry(f);
    const unsigned subsets = 1u << width;
    std::vector<double> next(law.size(), 0.0);
    std::vector<double> pw(width + 1), qw(width + 1);
    for (int k = 0; k <= width; ++k) {
        pw[k] = std::pow(p, k);
        qw[k] = std::pow(1 - p, k);
    }
    for (unsigned d = 0; d < subsets; ++d) {
        const unsigned above = spread(d, g.down, -1, width);
        for (unsigned e = 0; e < subsets; ++e) {
            const double w = law[d | (rotate(e, g.shift, width) << width)];
            if (w == 0.0) {
                continue;
            }
            const unsigned blocked = above | e;
            const int free = width - std::popcount(blocked);
            for (unsigned c = 0; c < subsets; ++c) {
                if ((c & blocked) == 0) {
                    next[c | (d << width)] += w * pw[std::popcount(c)] * qw[free - std::popcount(c)];
                }
            }
        }
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < law.size(); ++k) {
        worst = std::max(worst, std::abs(law[k] - next[k]));
    }
    return worst;
}

TransferFamily pair_family(const TransferFamily &f)
{
    return f.kind == TransferFamily::Kind::tri_line ? TransferFamily::tri_pair() : f;
}

} // namespace

TransferMatrix build_transfer(const TransferFamily &family, double p, IndexConvention convention)
{
    if (!(p > 0.0 && p < 1.0)) {
        throw Error(Errc::invalid_argument, "p", "p must lie in (0, 1)");
    }
    const auto rows = build_values<double>(family, p, convention);
    TransferMatrix t;
    const auto n = static_cast<Eigen::Index>(rows.size());
    t.values.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            t.values(i, j) = rows[i][j];
        }
    }
    t.window = family.window();
    t.p = p;
    t.label = family.to_string();
    return t;
}

std::vector<std::vector<Rational>> build_transfer_exact(const TransferFamily &family, const Rational &p,
                                                        IndexConvention convention)
{
    return build_values<Rational>(family, p, convention);
}

Neighborhoods neighborhoods(const TransferFamily &family, const std::vector<int> &c, int width)
{
    if (width < 1) {
        throw Error(Errc::invalid_argument, "N", "width must be positive");
    }
    std::vector<int> steps;
    using Kind = TransferFamily::Kind;
    switch (family.kind) {
    case Kind::lr: steps = family.offsets; break;
    case Kind::tri_pair:
    case Kind::tri_line: steps = {-1, 1}; break;
    case Kind::tn: {
        const int k = family.n / 2;
        if (family.n % 2 == 1) {
            for (int r = -k; r <= k; ++r) {
                steps.push_back(r);
            }
        } else {
            for (int r = -k; r <= k - 1; ++r) {
                steps.push_back(2 * r + 1);
            }
        }
        break;
    }
    }
    Neighborhoods out;
    for (int i : c) {
        if (i < 0 || i >= width) {
            throw Error(Errc::invalid_argument, "C", "index " + std::to_string(i) + " outside [0, N)");
        }
        for (int r : steps) {
            out.forward.push_back(floor_mod(i + r, width));
            out.backward.push_back(floor_mod(i - r, width));
        }
    }
    for (auto *v : {&out.forward, &out.backward}) {
        std::sort(v->begin(), v->end());
        v->erase(std::unique(v->begin(), v->end()), v->end());
    }
    return out;
}

LineLaw stationary_line_law(const TransferFamily &family, int width, double p)
{
    check_width(family, width, family.kind == TransferFamily::Kind::tri_pair ? 9 : 19);
    if (!(p > 0.0 && p < 1.0)) {
        throw Error(Errc::invalid_argument, "p", "p must lie in (0, 1)");
    }
    LineLaw law = build_law(family, width, p, IndexConvention::zero_based);
    if (family.kind == TransferFamily::Kind::lr &&
        (law.max_difference > 1e-12 || relative_gap(law.trace, law.subset_normalizer) > 1e-12)) {
        LineLaw other = build_law(family, width, p, IndexConvention::one_based);
        if (other.max_difference <= 1e-12 && relative_gap(other.trace, other.subset_normalizer) <= 1e-12) {
            return other;
        }
    }
    return law;
}

std::vector<double> pair_law(const TransferFamily &family, int width, double p)
{
    const TransferFamily f = pair_family(family);
    if (f.kind == TransferFamily::Kind::lr) {
        throw Error(Errc::invalid_argument, "family", "LR lines are Markov on their own; no pair law");
    }
    check_width(f, width, 9);
    return normalized(closed_pair_weights(f, width, p), nullptr);
}

double recurrence_residual(const TransferFamily &family, int width, double p, const std::vector<double> &law)
{
    if (family.kind == TransferFamily::Kind::lr) {
        check_width(family, width, 12);
        if (law.size() != (1u << width)) {
            throw Error(Errc::invalid_argument, "law", "law size must be 2^N");
        }
        return lr_line_residual(family, width, p, law);
    }
    const TransferFamily f = pair_family(family);
    check_width(f, width, 8);
    if (law.size() != (1u << (2 * width))) {
        throw Error(Errc::invalid_argument, "law", "pair law size must be 4^N");
    }
    return pair_residual(f, width, p, law);
}

RecurrenceReport recurrence_residual(const TransferFamily &family, int width, double p)
{
    RecurrenceReport out;
    const LineLaw law = stationary_line_law(family, width, p);
    out.convention = law.convention;
    out.trace_residual = relative_gap(law.trace, law.subset_normalizer);
    if (family.kind == TransferFamily::Kind::lr) {
        out.residual = recurrence_residual(family, width, p, law.closed);
        out.product_residual = recurrence_residual(family, width, p, law.product);
        return out;
    }
    const std::vector<double> pair = law.pair ? law.closed : pair_law(family, width, p);
    out.residual = recurrence_residual(family, width, p, pair);
    out.product_residual = law.pair ? recurrence_residual(family, width, p, law.product) : out.residual;
    // Summing the pair law over the second line gives the single-line law.
    const LineLaw line = stationary_line_law(family.kind == TransferFamily::Kind::tri_pair ? TransferFamily::tri_line()
                                                                                          : family,
                                             width, p);
    const unsigned subsets = 1u << width;
    for (unsigned c = 0; c < subsets; ++c) {
        double sum = 0.0;
        for (unsigned d = 0; d < subsets; ++d) {
            sum += pair[c | (d << width)];
        }
        out.marginal_residual = std::max(
            {out.marginal_residual, std::abs(sum - line.closed[c]), std::abs(sum - line.product[c])});
    }
    if (!law.pair) {
        out.product_residual = std::max(out.product_residual, out.marginal_residual);
    }
    return out;
}

std::vector<Rational> characteristic_polynomial(const std::vector<std::vector<Rational>> &a)
{
    const std::size_t n = a.size();
    // Faddeev-LeVerrier, exploiting the sparsity of A in the products.
    std::vector<std::vector<std::pair<std::size_t, Rational>>> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (a[i][j] != 0) {
                rows[i].emplace_back(j, a[i][j]);
            }
        }
    }
    auto times_a = [&](const std::vector<std::vector<Rational>> &m) {
        std::vector<std::vector<Rational>> out(n, std::vector<Rational>(n));
        for (std::size_t i = 0; i < n; ++i) {
            for (const auto &[k, aik] : rows[i]) {
                for (std::size_t j = 0; j < n; ++j) {
                    if (m[k][j] != 0) {
                        out[i][j] += aik * m[k][j];
                    }
                }
            }
        }
        return out;
    };
    std::vector<Rational> c(n + 1);
    c[n] = 1;
    std::vector<std::vector<Rational>> m(n, std::vector<Rational>(n));
    for (std::size_t k = 1; k <= n; ++k) {
        m = times_a(m);
        for (std::size_t i = 0; i < n; ++i) {
            m[i][i] += c[n - k + 1];
        }
        const auto am = times_a(m);
        Rational tr = 0;
        for (std::size_t i = 0; i < n; ++i) {
            tr += am[i][i];
        }
        c[n - k] = -tr / static_cast<long long>(k);
    }
    return c;
}

namespace {

using Poly = std::vector<Rational>;

Poly poly_mul(const Poly &a, const Poly &b)
{
    Poly out(a.size() + b.size() - 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            out[i + j] += a[i] * b[j];
        }
    }
    return out;
}

Poly monomial_shift(const Poly &a, std::size_t k)
{
    Poly out(k, Rational(0));
    out.insert(out.end(), a.begin(), a.end());
    return out;
}

bool poly_equal(Poly a, Poly b)
{
    const std::size_t n = std::max(a.size(), b.size());
    a.resize(n);
    b.resize(n);
    return a == b;
}

double poly_eval(const Poly &a, double x)
{
    double y = 0.0;
    for (std::size_t k = a.size(); k-- > 0;) {
        y = y * x + a[k].convert_to<double>();
    }
    return y;
}

} // namespace

CharPolyReport char_poly_check(const TransferFamily &family, const Rational &p)
{
    CharPolyReport out;
    out.family = family;
    out.p = p;
    out.computed = characteristic_polynomial(build_transfer_exact(family, p));
    const double pd = p.convert_to<double>();
    try {
        out.lambda = dominant_eigen(build_transfer(family, pd)).lambda;
    } catch (const Error &) {
        out.lambda = std::nan("");
    }
    const double lambda = out.lambda;
    out.residuals.emplace_back("charpoly-at-lambda",
                               poly_eval(out.computed, lambda) /
                                   std::max(1.0, std::pow(lambda, static_cast<double>(out.computed.size() - 1))));

    if (family.kind == TransferFamily::Kind::tn) {
        const int n = family.n;
        const std::size_t low = (std::size_t{1} << (n - 1)) - static_cast<std::size_t>(n);
        Poly core(n + 1, Rational(0));
        core[n] = 1;
        core[n - 1] = -(1 + 2 * p);
        for (int k = 0; k <= n - 2; ++k) {
            core[k] += p * p;
        }
        out.printed = monomial_shift(core, low);
        out.printed_matches = poly_equal(out.computed, out.printed);

        // (1 - x) chi(x) against x^low (p^2 - x^{n-1}(x + p^2 - 1)(x - (2p + 1))).
        const Poly lhs = poly_mul(Poly{Rational(1), Rational(-1)}, out.printed);
        Poly quad = poly_mul(Poly{p * p - 1, Rational(1)}, Poly{-(2 * p + 1), Rational(1)});
        Poly rhs = monomial_shift(quad, static_cast<std::size_t>(n - 1));
        for (auto &c : rhs) {
            c = -c;
        }
        rhs[0] += p * p;
        out.rewrite_matches = poly_equal(lhs, monomial_shift(rhs, low));

        const double l = lambda;
        const double lp = std::pow(l, n - 1);
        out.residuals.emplace_back("printed-root-identity", pd * pd - lp * (l + pd * pd - 1) * (l - (2 * pd + 1)));
        out.residuals.emplace_back("derived-root-identity", pd * pd - lp * (l - 1 - pd) * (l - 1 - pd));
        out.residuals.emplace_back("printed-chi-at-lambda", poly_eval(out.printed, l) / std::pow(l, out.printed.size() - 1));
    } else if (family.kind == TransferFamily::Kind::lr) {
        const int n = static_cast<int>(family.offsets.size());
        if (family.offsets.back() == n - 1) {
            const double l = lambda;
            out.residuals.emplace_back("printed-eigen-identity",
                                       l * l * std::pow(1 - pd, n - 1) - std::pow(l, n - 1) * (l - 1) * (l - 1));
        }
    }
    return out;
}

} // namespace dagas
