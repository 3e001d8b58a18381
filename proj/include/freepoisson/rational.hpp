#pragma once

#include <gmpxx.h>

#include <compare>
#include <concepts>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace freepoisson {

using Integer = mpz_class;

/// Exact rational in lowest terms with positive denominator.
class Rational {
public:
    Rational() = default;

    template <std::signed_integral T>
    Rational(T v) : value_(static_cast<long>(v)) {}

    template <std::unsigned_integral T>
    Rational(T v) : value_(static_cast<unsigned long>(v)) {}

    Rational(const Integer& v) : value_(v) {}

    Rational(const Integer& num, const Integer& den) {
        if (den == 0)
            throw UsageError("rational with zero denominator");
        value_ = mpq_class(num, den);
        value_.canonicalize();
    }

    explicit Rational(const mpq_class& v) : value_(v) { value_.canonicalize(); }

    /// Accepts "p/q", "p" and an optional leading sign; whitespace is not allowed.
    static Rational parse(std::string_view text) {
        auto bad = [&] { return UsageError("not a rational: '" + std::string(text) + "'"); };
        if (text.empty())
            throw bad();
        auto slash = text.find('/');
        auto digits_ok = [](std::string_view s, bool allow_sign) {
            if (allow_sign && !s.empty() && (s.front() == '-' || s.front() == '+'))
                s.remove_prefix(1);
            if (s.empty())
                return false;
            for (char c : s)
                if (c < '0' || c > '9')
                    return false;
            return true;
        };
        std::string_view num = text.substr(0, slash);
        std::string_view den = slash == std::string_view::npos ? std::string_view("1") : text.substr(slash + 1);
        if (!digits_ok(num, true) || !digits_ok(den, false))
            throw bad();
        std::string n(num);
        if (n.front() == '+')
            n.erase(0, 1);
        Integer d(std::string(den), 10);
        if (d == 0)
            throw bad();
        return Rational(Integer(n, 10), d);
    }

    Integer numerator() const { return value_.get_num(); }
    Integer denominator() const { return value_.get_den(); }
    const mpq_class& raw() const noexcept { return value_; }

    int sign() const { return sgn(value_); }
    bool is_zero() const { return sign() == 0; }
    bool is_integer() const { return value_.get_den() == 1; }
    double to_double() const { return value_.get_d(); }

    /// "p/q", or just "p" for integers.
    std::string str() const { return value_.get_str(); }

    /// Fixed-point rendering with `significant` significant digits, rounded
    /// half away from zero.
    std::string decimal(int significant = 20) const;

    Rational& operator+=(const Rational& o) { value_ += o.value_; return *this; }
    Rational& operator-=(const Rational& o) { value_ -= o.value_; return *this; }
    Rational& operator*=(const Rational& o) { value_ *= o.value_; return *this; }
    Rational& operator/=(const Rational& o) {
        if (o.is_zero())
            throw UsageError("division by zero rational");
        value_ /= o.value_;
        return *this;
    }

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
    friend Rational operator-(const Rational& a) { return Rational(mpq_class(-a.value_)); }

    friend bool operator==(const Rational& a, const Rational& b) { return a.value_ == b.value_; }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        int c = cmp(a.value_, b.value_);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

private:
    mpq_class value_{0};
};

inline Rational abs(const Rational& r) { return r.sign() < 0 ? -r : r; }

inline Rational pow(const Rational& base, unsigned exponent) {
    Integer num, den;
    mpz_pow_ui(num.get_mpz_t(), base.raw().get_num_mpz_t(), exponent);
    mpz_pow_ui(den.get_mpz_t(), base.raw().get_den_mpz_t(), exponent);
    return Rational(num, den);
}

inline std::string Rational::decimal(int significant) const {
    if (significant < 1)
        significant = 1;
    if (is_zero())
        return "0";
    Integer num = abs(*this).numerator();
    Integer den = denominator();

    // exponent e with 10^e <= |x| < 10^(e+1)
    long e = static_cast<long>(mpz_sizeinbase(num.get_mpz_t(), 10)) -
             static_cast<long>(mpz_sizeinbase(den.get_mpz_t(), 10));
    auto ten_pow = [](long k) {
        Integer p;
        mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(k));
        return p;
    };
    auto at_least = [&](long k) { // |x| >= 10^k
        return k >= 0 ? num >= den * ten_pow(k) : num * ten_pow(-k) >= den;
    };
    while (!at_least(e))
        --e;
    while (at_least(e + 1))
        ++e;

    // digits = round(|x| * 10^(significant-1-e))
    long shift = significant - 1 - e;
    Integer scaled_num = shift >= 0 ? num * ten_pow(shift) : num;
    Integer scaled_den = shift >= 0 ? den : den * ten_pow(-shift);
    Integer q, r;
    mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), scaled_num.get_mpz_t(), scaled_den.get_mpz_t());
    if (2 * r >= scaled_den)
        ++q;
    if (q == ten_pow(significant)) { // rounding carried into a new digit
        q = ten_pow(significant - 1);
        ++e;
        --shift;
    }
    std::string digits = q.get_str();

    std::string out = sign() < 0 ? "-" : "";
    if (shift <= 0) {
        out += digits;
        out.append(static_cast<std::size_t>(-shift), '0');
    } else if (e >= 0) {
        auto int_len = static_cast<std::size_t>(e + 1);
        out += digits.substr(0, int_len);
        out += '.';
        out += digits.substr(int_len);
    } else {
        out += "0.";
        out.append(static_cast<std::size_t>(-e - 1), '0');
        out += digits;
    }
    return out;
}

} // namespace freepoisson
