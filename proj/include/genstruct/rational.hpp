#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>

#include "errors.hpp"

namespace genstruct {

using BigInt = boost::multiprecision::cpp_int;

// Exact rational with arbitrary-precision components. Always stored reduced
// with positive denominator. cpp_rational would fit, but its two-argument
// constructor rejects negative denominators and its free numerator()/
// denominator() choke on expression templates, so this thin type keeps the
// normalization in one place and exposes plain accessors.
class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(long long n) : num_(n), den_(1) {}  // NOLINT: implicit by design
    Rational(const BigInt& n) : num_(n), den_(1) {}
    Rational(BigInt n, BigInt d) : num_(std::move(n)), den_(std::move(d)) {
        normalize();
    }

    const BigInt& num() const { return num_; }
    const BigInt& den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_negative() const { return num_ < 0; }
    bool is_positive() const { return num_ > 0; }
    bool is_integer() const { return den_ == 1; }

    Rational operator-() const { return Rational(-num_, den_, already_reduced{}); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return Rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return Rational(a.num_ * b.num_, a.den_ * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw InputError("rational division by zero");
        return Rational(a.num_ * b.den_, a.den_ * b.num_);
    }
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return a.num_ * b.den_ < b.num_ * a.den_;
    }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

    // Renders "n" for integers, "n/d" otherwise.
    std::string str() const {
        std::string s = num_.str();
        if (den_ != 1) s += "/" + den_.str();
        return s;
    }

    // Accepts "n" or "n/d" with optional leading minus on the numerator.
    static Rational parse(const std::string& text) {
        auto slash = text.find('/');
        try {
            if (slash == std::string::npos) return Rational(BigInt(text));
            BigInt n(text.substr(0, slash));
            BigInt d(text.substr(slash + 1));
            if (d == 0) throw InputError("rational with zero denominator: " + text);
            return Rational(n, d);
        } catch (const std::runtime_error&) {
            throw InputError("cannot parse rational: " + text);
        }
    }

private:
    struct already_reduced {};
    Rational(BigInt n, BigInt d, already_reduced)
        : num_(std::move(n)), den_(std::move(d)) {}

    void normalize() {
        if (den_ == 0) throw InputError("rational with zero denominator");
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        BigInt g = boost::multiprecision::gcd(num_ < 0 ? BigInt(-num_) : num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
        if (num_ == 0) den_ = 1;
    }

    BigInt num_;
    BigInt den_;
};

}  // namespace genstruct
