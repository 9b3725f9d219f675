#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace msubdiv {

using Int128 = __int128;

namespace detail {

inline unsigned __int128 uabs128(Int128 v) {
    return v < 0 ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
}

inline int bit_length(unsigned __int128 v) {
    int n = 0;
    while (v) {
        ++n;
        v >>= 1;
    }
    return n;
}

inline Int128 gcd128(Int128 a, Int128 b) {
    unsigned __int128 x = uabs128(a), y = uabs128(b);
    while (y) {
        unsigned __int128 t = x % y;
        x = y;
        y = t;
    }
    return static_cast<Int128>(x);
}

inline Int128 checked_mul(Int128 a, Int128 b) {
    if (a == 0 || b == 0) return 0;
    if (bit_length(uabs128(a)) + bit_length(uabs128(b)) > 126)
        throw std::overflow_error("rational arithmetic overflow (product too wide)");
    return a * b;
}

inline Int128 checked_add(Int128 a, Int128 b) {
    if (bit_length(uabs128(a)) > 125 || bit_length(uabs128(b)) > 125)
        throw std::overflow_error("rational arithmetic overflow (sum too wide)");
    return a + b;
}

inline std::string int128_to_string(Int128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    unsigned __int128 u = uabs128(v);
    std::string s;
    while (u) {
        s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
        u /= 10;
    }
    if (neg) s.push_back('-');
    return {s.rbegin(), s.rend()};
}

} // namespace detail

/// Exact rational scalar. Always normalized: gcd(num, den) = 1, den > 0.
class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(long long n) : num_(n), den_(1) {} // NOLINT(google-explicit-constructor)
    Rational(Int128 num, Int128 den) {
        if (den == 0) throw std::domain_error("rational with zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        Int128 g = detail::gcd128(num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
        num_ = num;
        den_ = den;
    }

    Int128 num() const { return num_; }
    Int128 den() const { return den_; }
    bool is_zero() const { return num_ == 0; }
    bool is_integer() const { return den_ == 1; }
    int sign() const { return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0); }

    Rational operator-() const { return raw(-num_, den_); }

    Rational operator+(const Rational& o) const {
        Int128 g = detail::gcd128(den_, o.den_);
        Int128 dl = den_ / g;
        Int128 n = detail::checked_add(detail::checked_mul(num_, o.den_ / g),
                                       detail::checked_mul(o.num_, dl));
        return Rational(n, detail::checked_mul(dl, o.den_));
    }
    Rational operator-(const Rational& o) const { return *this + (-o); }

    Rational operator*(const Rational& o) const {
        Int128 g1 = detail::gcd128(num_, o.den_);
        Int128 g2 = detail::gcd128(o.num_, den_);
        return raw(detail::checked_mul(num_ / g1, o.num_ / g2),
                   detail::checked_mul(den_ / g2, o.den_ / g1));
    }
    Rational operator/(const Rational& o) const {
        if (o.num_ == 0) throw std::domain_error("rational division by zero");
        Int128 n = o.num_, d = o.den_;
        if (n < 0) {
            n = -n;
            d = -d;
        }
        return *this * raw(d, n);
    }

    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
    std::strong_ordering operator<=>(const Rational& o) const {
        Int128 l = detail::checked_mul(num_, o.den_);
        Int128 r = detail::checked_mul(o.num_, den_);
        return l <=> r;
    }

    Rational abs() const { return num_ < 0 ? -*this : *this; }

    double to_double() const {
        return static_cast<double>(static_cast<long double>(num_) /
                                   static_cast<long double>(den_));
    }

    std::string str() const {
        std::string s = detail::int128_to_string(num_);
        if (den_ != 1) s += "/" + detail::int128_to_string(den_);
        return s;
    }

    /// Accepts "p/q", plain integers and finite decimals ("-3", "0.25").
    static Rational parse(std::string_view s) {
        auto strip = [](std::string_view v) {
            while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
            while (!v.empty() && (v.back() == ' ' || v.back() == '\t')) v.remove_suffix(1);
            return v;
        };
        s = strip(s);
        if (s.empty()) throw std::invalid_argument("empty rational literal");
        auto slash = s.find('/');
        if (slash != std::string_view::npos) {
            Rational p = parse_decimal(strip(s.substr(0, slash)));
            Rational q = parse_decimal(strip(s.substr(slash + 1)));
            if (!p.is_integer() || !q.is_integer())
                throw std::invalid_argument("rational literal \"" + std::string(s) +
                                            "\": p/q parts must be integers");
            return p / q;
        }
        return parse_decimal(s);
    }

    /// Exact value of the double (every finite double is a dyadic rational).
    static Rational from_double(double x) {
        if (!std::isfinite(x)) throw std::domain_error("non-finite value in rational context");
        if (x == 0.0) return Rational(0);
        int exp = 0;
        double m = std::frexp(x, &exp);
        auto num = static_cast<Int128>(std::ldexp(m, 53));
        exp -= 53;
        while (num != 0 && (num & 1) == 0) {
            num >>= 1;
            ++exp;
        }
        if (exp >= 0) {
            if (exp > 70) throw std::overflow_error("double too large for exact rational");
            return raw(num << exp, 1);
        }
        if (exp < -120) throw std::overflow_error("double too small for exact rational");
        return raw(num, Int128(1) << -exp);
    }

private:
    static Rational raw(Int128 n, Int128 d) {
        Rational r;
        r.num_ = n;
        r.den_ = d;
        return r;
    }

    static Rational parse_decimal(std::string_view s) {
        if (s.empty()) throw std::invalid_argument("empty rational literal");
        bool neg = false;
        size_t i = 0;
        if (s[0] == '+' || s[0] == '-') {
            neg = s[0] == '-';
            i = 1;
        }
        Int128 num = 0;
        Int128 den = 1;
        bool seen_digit = false, seen_dot = false;
        for (; i < s.size(); ++i) {
            char c = s[i];
            if (c == '.') {
                if (seen_dot) throw std::invalid_argument("malformed rational literal");
                seen_dot = true;
                continue;
            }
            if (c < '0' || c > '9')
                throw std::invalid_argument("malformed rational literal \"" + std::string(s) + "\"");
            seen_digit = true;
            num = detail::checked_add(detail::checked_mul(num, 10), c - '0');
            if (seen_dot) den = detail::checked_mul(den, 10);
        }
        if (!seen_digit) throw std::invalid_argument("malformed rational literal");
        return Rational(neg ? -num : num, den);
    }

    Int128 num_;
    Int128 den_;
};

inline std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

} // namespace msubdiv
