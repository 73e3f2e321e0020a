#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qgrad {

/// Exact rational on int64 numerator/denominator. Intermediate products go
/// through __int128, so stencil-coefficient arithmetic stays exact for every
/// half-width this library accepts (m <= 12).
class Rational {
public:
    Rational() = default;
    Rational(std::int64_t value) : num_(value) {} // NOLINT(google-explicit-constructor)
    Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) { normalize(); }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    Rational operator-() const { return Rational(-num_, den_); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        __int128 n = i128(a.num_) * b.den_ + i128(b.num_) * a.den_;
        __int128 d = i128(a.den_) * b.den_;
        return from_i128(n, d);
    }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return from_i128(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("rational division by zero");
        return from_i128(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
    }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
    }
    friend bool operator<=(const Rational& a, const Rational& b) { return a < b || a == b; }

    Rational abs() const { return num_ < 0 ? -*this : *this; }

    std::string str() const {
        return den_ == 1 ? std::to_string(num_)
                         : std::to_string(num_) + "/" + std::to_string(den_);
    }

private:
    using i128 = __int128;

    static Rational from_i128(i128 n, i128 d) {
        if (d < 0) { n = -n; d = -d; }
        i128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
            throw std::overflow_error("rational arithmetic overflow");
        Rational r;
        r.num_ = static_cast<std::int64_t>(n);
        r.den_ = static_cast<std::int64_t>(d);
        return r;
    }

    static i128 gcd128(i128 a, i128 b) {
        while (b != 0) { i128 t = a % b; a = b; b = t; }
        return a == 0 ? 1 : a;
    }

    void normalize() {
        if (den_ == 0) throw std::domain_error("rational with zero denominator");
        if (den_ < 0) { num_ = -num_; den_ = -den_; }
        std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) { num_ /= g; den_ /= g; }
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

} // namespace qgrad
