#pragma once

#include <string>

#include "affharm/bigint.hpp"

namespace affharm {

// Exact rational, gcd-reduced with positive denominator.
class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(int64_t v) : num_(v), den_(1) {}
    Rational(BigInt num, BigInt den);
    static Rational from_string(const std::string& s);  // "num/den" or "num"
    // exact conversion (doubles are dyadic rationals); rejects NaN/inf
    static Rational from_double(double v);

    const BigInt& num() const { return num_; }
    const BigInt& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_one() const { return num_.is_one() && den_.is_one(); }
    bool is_integer() const { return den_.is_one(); }
    int sign() const { return num_.sign(); }

    Rational operator+(const Rational& o) const;
    Rational operator-(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    Rational operator/(const Rational& o) const;
    Rational operator-() const;
    Rational inverse() const;
    Rational abs() const;

    int compare(const Rational& o) const;
    bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const Rational& o) const { return !(*this == o); }
    bool operator<(const Rational& o) const { return compare(o) < 0; }
    bool operator<=(const Rational& o) const { return compare(o) <= 0; }
    bool operator>(const Rational& o) const { return compare(o) > 0; }
    bool operator>=(const Rational& o) const { return compare(o) >= 0; }

    double to_double() const;
    BigInt floor() const;
    BigInt ceil() const;
    std::string to_string() const;  // "num/den", "/den" omitted for integers
    size_t hash() const;

private:
    void normalize();
    BigInt num_, den_;
};

}  // namespace affharm
