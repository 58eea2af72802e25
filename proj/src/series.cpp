#include "dagas/series.hpp"

#include "dagas/error.hpp"

#include <algorithm>
#include <sstream>

namespace dagas {

namespace {

using boost::multiprecision::cpp_int;

bool exact_square_root(const cpp_int &x, cpp_int &root)
{
    if (x < 0) {
        return false;
    }
    root = boost::multiprecision::sqrt(x);
    return root * root == x;
}

} // namespace

Series::Series(const Rational &c)
{
    if (c != 0) {
        coeffs_.push_back(c);
    }
}

Series Series::variable(int precision)
{
    return from_coefficients(1, {Rational(1)}, precision);
}

Series Series::from_coefficients(int low, std::vector<Rational> coeffs, int precision)
{
    Series s;
    s.low_ = low;
    s.coeffs_ = std::move(coeffs);
    s.prec_ = std::min(precision, exact);
    s.normalize();
    return s;
}

void Series::normalize()
{
    if (low_ + static_cast<long long>(coeffs_.size()) > prec_) {
        coeffs_.resize(static_cast<std::size_t>(std::max(0, prec_ - low_)));
    }
    auto first = std::find_if(coeffs_.begin(), coeffs_.end(), [](const Rational &c) { return c != 0; });
    low_ += static_cast<int>(first - coeffs_.begin());
    coeffs_.erase(coeffs_.begin(), first);
    while (!coeffs_.empty() && coeffs_.back() == 0) {
        coeffs_.pop_back();
    }
    if (coeffs_.empty()) {
        low_ = 0;
    }
}

Rational Series::coefficient(int k) const
{
    if (k >= prec_) {
        throw Error(Errc::invalid_argument, "series",
                    "coefficient of order " + std::to_string(k) + " is beyond the known precision " +
                        std::to_string(prec_));
    }
    if (k < low_ || k >= low_ + static_cast<int>(coeffs_.size())) {
        return Rational(0);
    }
    return coeffs_[static_cast<std::size_t>(k - low_)];
}

Series Series::truncated(int precision) const
{
    Series s = *this;
    s.prec_ = std::min(prec_, precision);
    s.normalize();
    return s;
}

Series Series::operator-() const
{
    Series s = *this;
    for (auto &c : s.coeffs_) {
        c = -c;
    }
    return s;
}

Series operator+(const Series &a, const Series &b)
{
    const int prec = std::min(a.prec_, b.prec_);
    if (a.is_zero()) {
        return b.truncated(prec);
    }
    if (b.is_zero()) {
        return a.truncated(prec);
    }
    const int low = std::min(a.low_, b.low_);
    const int high = std::min<long long>(prec, std::max(a.low_ + a.coeffs_.size(), b.low_ + b.coeffs_.size()));
    std::vector<Rational> c(static_cast<std::size_t>(std::max(0, high - low)));
    for (int k = low; k < high; ++k) {
        c[static_cast<std::size_t>(k - low)] = a.coefficient(k) + b.coefficient(k);
    }
    return Series::from_coefficients(low, std::move(c), prec);
}

Series operator*(const Series &a, const Series &b)
{
    const long long pa = static_cast<long long>(a.prec_) + b.valuation();
    const long long pb = static_cast<long long>(b.prec_) + a.valuation();
    const int prec = static_cast<int>(std::min<long long>({pa, pb, Series::exact}));
    if (a.is_zero() || b.is_zero()) {
        return Series::from_coefficients(0, {}, prec);
    }
    const int low = a.low_ + b.low_;
    const long long full = static_cast<long long>(a.coeffs_.size() + b.coeffs_.size()) - 1;
    const int len = static_cast<int>(std::max<long long>(0, std::min<long long>(full, prec - low)));
    std::vector<Rational> c(static_cast<std::size_t>(len));
    for (std::size_t i = 0; i < a.coeffs_.size() && static_cast<int>(i) < len; ++i) {
        for (std::size_t j = 0; j < b.coeffs_.size() && static_cast<int>(i + j) < len; ++j) {
            c[i + j] += a.coeffs_[i] * b.coeffs_[j];
        }
    }
    return Series::from_coefficients(low, std::move(c), prec);
}

Series Series::inverse() const
{
    if (is_zero()) {
        throw Error(Errc::zero_normalizer, "series", "inverse of a series with no known nonzero coefficient");
    }
    if (is_exact() && coeffs_.size() > 1) {
        throw Error(Errc::invalid_argument, "series", "inverse of an exact polynomial needs a finite precision");
    }
    const int v = low_;
    const int rel = is_exact() ? 1 : prec_ - v;
    std::vector<Rational> b(static_cast<std::size_t>(rel));
    const Rational inv0 = 1 / coeffs_[0];
    b[0] = inv0;
    for (int n = 1; n < rel; ++n) {
        Rational acc = 0;
        for (int i = 1; i <= n && i < static_cast<int>(coeffs_.size()); ++i) {
            acc += coeffs_[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(n - i)];
        }
        b[static_cast<std::size_t>(n)] = -acc * inv0;
    }
    return from_coefficients(-v, std::move(b), is_exact() ? exact : prec_ - 2 * v);
}

Series Series::pow(int n) const
{
    return power(*this, n);
}

Series sqrt(const Series &s)
{
    if (s.is_zero()) {
        return s;
    }
    const int v = s.valuation();
    if (v % 2 != 0) {
        throw Error(Errc::invalid_argument, "series", "square root of a series with odd valuation");
    }
    const Rational a0 = s.coefficient(v);
    cpp_int rn;
    cpp_int rd;
    if (!exact_square_root(boost::multiprecision::numerator(a0), rn) ||
        !exact_square_root(boost::multiprecision::denominator(a0), rd)) {
        throw Error(Errc::invalid_argument, "series", "leading coefficient is not a rational square");
    }
    const Rational b0(rn, rd);
    if (s.is_exact()) {
        if ((s - Series::from_coefficients(v, {a0})).is_zero()) {
            return Series::from_coefficients(v / 2, {b0});
        }
        throw Error(Errc::invalid_argument, "series", "square root of an exact polynomial needs a finite precision");
    }
    const int rel = s.precision() - v;
    std::vector<Rational> a;
    for (int k = 0; k < rel; ++k) {
        a.push_back(s.coefficient(v + k));
    }
    std::vector<Rational> b(static_cast<std::size_t>(rel));
    b[0] = b0;
    for (int n = 1; n < rel; ++n) {
        Rational acc = a[static_cast<std::size_t>(n)];
        for (int i = 1; i < n; ++i) {
            acc -= b[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(n - i)];
        }
        b[static_cast<std::size_t>(n)] = acc / (2 * b0);
    }
    return Series::from_coefficients(v / 2, std::move(b), v / 2 + rel);
}

std::string Series::to_string(const std::string &var) const
{
    std::ostringstream os;
    bool first = true;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        if (coeffs_[i] == 0) {
            continue;
        }
        const int k = low_ + static_cast<int>(i);
        if (!first) {
            os << " + ";
        }
        first = false;
        os << coeffs_[i];
        if (k != 0) {
            os << "*" << var << "^" << k;
        }
    }
    if (first) {
        os << "0";
    }
    if (!is_exact()) {
        os << " + O(" << var << "^" << prec_ << ")";
    }
    return os.str();
}

} // namespace dagas
