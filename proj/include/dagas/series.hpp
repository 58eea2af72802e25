#pragma once

// Truncated formal Laurent series with exact rational coefficients.
//
// A series is known modulo t^precision(). Arithmetic propagates the
// precision, so a residual computed from truncated inputs reports by itself
// how far it can be trusted.

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <vector>

namespace dagas {

using Rational = boost::multiprecision::cpp_rational;

class Series {
public:
    // Precision of exact series (polynomials with no error term).
    static constexpr int exact = 1 << 28;

    Series() = default;
    Series(long long c) : Series(Rational(c)) {}
    Series(const Rational &c);

    // t + O(t^precision)
    static Series variable(int precision);
    // sum_i coeffs[i] t^(low + i) + O(t^precision)
    static Series from_coefficients(int low, std::vector<Rational> coeffs, int precision = exact);

    int precision() const noexcept { return prec_; }
    bool is_exact() const noexcept { return prec_ >= exact; }
    // Lowest exponent with a nonzero coefficient; precision() if none is known.
    int valuation() const noexcept { return coeffs_.empty() ? prec_ : low_; }
    // Coefficient of t^k; throws for k >= precision().
    Rational coefficient(int k) const;
    // True iff every known coefficient vanishes.
    bool is_zero() const noexcept { return coeffs_.empty(); }

    Series truncated(int precision) const;
    Series inverse() const;
    Series pow(int n) const;

    Series operator-() const;
    Series &operator+=(const Series &o) { return *this = *this + o; }
    Series &operator-=(const Series &o) { return *this = *this - o; }
    Series &operator*=(const Series &o) { return *this = *this * o; }
    Series &operator/=(const Series &o) { return *this = *this / o; }

    friend Series operator+(const Series &a, const Series &b);
    friend Series operator-(const Series &a, const Series &b) { return a + (-b); }
    friend Series operator*(const Series &a, const Series &b);
    friend Series operator/(const Series &a, const Series &b) { return a * b.inverse(); }

    std::string to_string(const std::string &var = "t") const;

private:
    void normalize();

    int low_ = 0;
    std::vector<Rational> coeffs_;
    int prec_ = exact;
};

// Leading coefficient must be a square of a rational and the valuation even.
Series sqrt(const Series &s);

// Integer powers for any field-like scalar (double or Series).
template <typename T>
T power(const T &x, int n)
{
    if (n < 0) {
        return power(T(1) / x, -n);
    }
    T result(1);
    T base = x;
    while (n > 0) {
        if (n & 1) {
            result = result * base;
        }
        n >>= 1;
        if (n > 0) {
            base = base * base;
        }
    }
    return result;
}

} // namespace dagas
