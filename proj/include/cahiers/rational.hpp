#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cctype>
#include <optional>
#include <stdexcept>
#include <string>

namespace cahiers {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt rat_num(const Rational& r) { return boost::multiprecision::numerator(r); }
inline BigInt rat_den(const Rational& r) { return boost::multiprecision::denominator(r); }

inline bool is_integer(const Rational& r) { return rat_den(r) == 1; }

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline Rational rat_pow(const Rational& base, long long exp) {
    if (exp == 0) return Rational(1);
    if (base == 0 && exp < 0) throw std::domain_error("0 raised to a negative power");
    Rational b = exp < 0 ? Rational(1) / base : base;
    unsigned long long n = exp < 0 ? static_cast<unsigned long long>(-exp)
                                   : static_cast<unsigned long long>(exp);
    Rational acc(1);
    while (n) {
        if (n & 1) acc *= b;
        b *= b;
        n >>= 1;
    }
    return acc;
}

inline Rational rat_factorial(unsigned n) {
    Rational acc(1);
    for (unsigned k = 2; k <= n; ++k) acc *= k;
    return acc;
}

// "3", "-3/4"
inline std::string rat_to_string(const Rational& r) {
    std::string s = rat_num(r).str();
    if (!is_integer(r)) s += "/" + rat_den(r).str();
    return s;
}

// Exact conversion of a decimal literal like "1.25" or "3e-2"; digits only, no sign.
inline Rational rational_from_decimal(const std::string& text) {
    std::string digits;
    long long scale = 0;  // power of ten to divide by
    std::size_t i = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) digits += text[i++];
    if (i < text.size() && text[i] == '.') {
        ++i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
            digits += text[i++];
            ++scale;
        }
    }
    long long exp10 = 0;
    if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        ++i;
        bool neg = false;
        if (i < text.size() && (text[i] == '+' || text[i] == '-')) neg = text[i++] == '-';
        long long v = 0;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) v = v * 10 + (text[i++] - '0');
        exp10 = neg ? -v : v;
    }
    if (digits.empty() || i != text.size()) throw std::invalid_argument("bad numeric literal: " + text);
    Rational r{BigInt(digits)};
    return r * rat_pow(Rational(10), exp10 - scale);
}

// Exact square root when the argument is a perfect square of a rational.
inline std::optional<Rational> rat_exact_sqrt(const Rational& r) {
    if (r < 0) return std::nullopt;
    BigInt n = boost::multiprecision::sqrt(rat_num(r));
    BigInt d = boost::multiprecision::sqrt(rat_den(r));
    if (n * n != rat_num(r) || d * d != rat_den(r)) return std::nullopt;
    return Rational(n, d);
}

}  // namespace cahiers
