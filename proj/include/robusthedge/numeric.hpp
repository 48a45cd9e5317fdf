#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace robusthedge {

using Rational = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;

/// Sign and comparison policy for a scalar type.
///
/// Rationals compare exactly and ignore the tolerance. Doubles treat any
/// magnitude at or below `tol` as zero.
template <class T>
struct Arith {
    static constexpr bool exact = false;
    double tol = 1e-9;

    int sign(const T& x) const {
        if (x > tol) return 1;
        if (x < -tol) return -1;
        return 0;
    }
};

template <>
struct Arith<Rational> {
    static constexpr bool exact = true;
    double tol = 0.0;

    int sign(const Rational& x) const { return x.sign(); }
};

template <class T>
bool is_zero(const Arith<T>& a, const T& x) { return a.sign(x) == 0; }
template <class T>
bool is_pos(const Arith<T>& a, const T& x) { return a.sign(x) > 0; }
template <class T>
bool is_neg(const Arith<T>& a, const T& x) { return a.sign(x) < 0; }
template <class T>
bool approx_eq(const Arith<T>& a, const T& x, const T& y) { return a.sign(T(x - y)) == 0; }
template <class T>
bool approx_le(const Arith<T>& a, const T& x, const T& y) { return a.sign(T(x - y)) <= 0; }

template <class T>
T dot(const std::vector<T>& a, const std::vector<T>& b) {
    T s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

template <class To, class From>
To scalar_cast(const From& x) {
    if constexpr (std::is_same_v<To, From>) {
        return x;
    } else if constexpr (std::is_same_v<From, Rational>) {
        return x.template convert_to<To>();
    } else {
        return To(x);
    }
}

template <class To, class From>
std::vector<To> vector_cast(const std::vector<From>& v) {
    std::vector<To> out;
    out.reserve(v.size());
    for (const auto& x : v) out.push_back(scalar_cast<To>(x));
    return out;
}

namespace detail {

inline bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

inline BigInt pow10(unsigned long n) {
    BigInt r = 1;
    for (unsigned long i = 0; i < n; ++i) r *= 10;
    return r;
}

}  // namespace detail

/// Parses "p/q", a plain integer, or a decimal literal such as "-1.25e-3".
/// Decimals are converted exactly through a scaled integer.
/// Throws std::invalid_argument on anything else.
inline Rational parse_rational(std::string_view text) {
    auto fail = [&] { throw std::invalid_argument("not a rational number: '" + std::string(text) + "'"); };
    std::string_view s = text;
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    if (s.empty()) fail();

    bool negative = false;
    if (s.front() == '+' || s.front() == '-') {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }

    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        std::string_view num = s.substr(0, slash);
        std::string_view den = s.substr(slash + 1);
        if (!detail::all_digits(num) || !detail::all_digits(den)) fail();
        BigInt q{std::string(den)};
        if (q == 0) fail();
        Rational r(BigInt{std::string(num)}, q);
        return negative ? Rational(-r) : r;
    }

    std::string_view mantissa = s;
    long exponent = 0;
    if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
        mantissa = s.substr(0, e);
        std::string_view ex = s.substr(e + 1);
        bool exp_neg = false;
        if (!ex.empty() && (ex.front() == '+' || ex.front() == '-')) {
            exp_neg = ex.front() == '-';
            ex.remove_prefix(1);
        }
        if (!detail::all_digits(ex) || ex.size() > 6) fail();
        exponent = std::stol(std::string(ex));
        if (exp_neg) exponent = -exponent;
    }
    std::string digits;
    long frac_len = 0;
    if (auto dot_pos = mantissa.find('.'); dot_pos != std::string_view::npos) {
        std::string_view ip = mantissa.substr(0, dot_pos);
        std::string_view fp = mantissa.substr(dot_pos + 1);
        if (ip.empty() && fp.empty()) fail();
        if ((!ip.empty() && !detail::all_digits(ip)) || (!fp.empty() && !detail::all_digits(fp))) fail();
        digits = std::string(ip) + std::string(fp);
        frac_len = static_cast<long>(fp.size());
    } else {
        if (!detail::all_digits(mantissa)) fail();
        digits = std::string(mantissa);
    }
    long scale = exponent - frac_len;
    Rational r{BigInt(digits)};
    if (scale > 0) r *= Rational(detail::pow10(static_cast<unsigned long>(scale)));
    if (scale < 0) r /= Rational(detail::pow10(static_cast<unsigned long>(-scale)));
    return negative ? Rational(-r) : r;
}

/// Canonical "p/q" text; the denominator is always written.
inline std::string to_fraction_string(const Rational& r) {
    return boost::multiprecision::numerator(r).str() + "/" + boost::multiprecision::denominator(r).str();
}

inline std::string decimal_string(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

/// Human rendering: "6/5 (=1.2)"; integers print bare.
inline std::string format_value(const Rational& r) {
    if (boost::multiprecision::denominator(r) == 1) return boost::multiprecision::numerator(r).str();
    return to_fraction_string(r) + " (=" + decimal_string(r.convert_to<double>()) + ")";
}

inline std::string format_value(double x) { return decimal_string(x); }

}  // namespace robusthedge
