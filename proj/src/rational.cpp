#include "affharm/rational.hpp"

#include <cmath>
#include <stdexcept>

namespace affharm {

Rational::Rational(BigInt num, BigInt den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) throw std::domain_error("Rational: zero denominator");
    normalize();
}

void Rational::normalize() {
    if (den_.is_negative()) {
        num_ = -num_;
        den_ = -den_;
    }
    if (num_.is_zero()) {
        den_ = BigInt(1);
        return;
    }
    BigInt g = BigInt::gcd(num_, den_);
    if (!g.is_one()) {
        num_ = num_ / g;
        den_ = den_ / g;
    }
}

Rational Rational::from_string(const std::string& s) {
    size_t slash = s.find('/');
    if (slash == std::string::npos) return Rational(BigInt::from_string(s), BigInt(1));
    return Rational(BigInt::from_string(s.substr(0, slash)),
                    BigInt::from_string(s.substr(slash + 1)));
}

Rational Rational::from_double(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("Rational: non-finite double");
    if (v == 0.0) return Rational();
    int exp = 0;
    double m = std::frexp(v, &exp);  // v = m * 2^exp, |m| in [0.5, 1)
    int64_t mant = static_cast<int64_t>(std::ldexp(m, 53));
    exp -= 53;
    BigInt num(mant), den(1);
    if (exp >= 0) num = num.shifted_left(static_cast<uint32_t>(exp));
    else den = den.shifted_left(static_cast<uint32_t>(-exp));
    return Rational(std::move(num), std::move(den));
}

Rational Rational::operator+(const Rational& o) const {
    return Rational(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
}
Rational Rational::operator-(const Rational& o) const {
    return Rational(num_ * o.den_ - o.num_ * den_, den_ * o.den_);
}
Rational Rational::operator*(const Rational& o) const {
    return Rational(num_ * o.num_, den_ * o.den_);
}
Rational Rational::operator/(const Rational& o) const {
    if (o.is_zero()) throw std::domain_error("Rational: division by zero");
    return Rational(num_ * o.den_, den_ * o.num_);
}
Rational Rational::operator-() const {
    Rational r = *this;
    r.num_ = -r.num_;
    return r;
}
Rational Rational::inverse() const {
    if (is_zero()) throw std::domain_error("Rational: inverse of zero");
    return Rational(den_, num_);
}
Rational Rational::abs() const {
    Rational r = *this;
    r.num_ = r.num_.abs();
    return r;
}

int Rational::compare(const Rational& o) const {
    return (num_ * o.den_).compare(o.num_ * den_);
}

double Rational::to_double() const {
    if (is_zero()) return 0.0;
    // scale-aware: direct ratio when both fit, else via logs
    double n = num_.to_double(), d = den_.to_double();
    if (std::isfinite(n) && std::isfinite(d) && d != 0.0) return n / d;
    double lg = num_.log_magnitude() - den_.log_magnitude();
    double mag = std::exp(lg);
    return num_.is_negative() ? -mag : mag;
}

BigInt Rational::floor() const {
    BigInt::DivRem dr = num_.divrem(den_);
    if (!dr.rem.is_zero() && num_.is_negative()) return dr.quot - BigInt(1);
    return dr.quot;
}

BigInt Rational::ceil() const {
    BigInt::DivRem dr = num_.divrem(den_);
    if (!dr.rem.is_zero() && !num_.is_negative()) return dr.quot + BigInt(1);
    return dr.quot;
}

std::string Rational::to_string() const {
    if (den_.is_one()) return num_.to_string();
    return num_.to_string() + "/" + den_.to_string();
}

size_t Rational::hash() const {
    size_t h = num_.hash();
    h ^= den_.hash() + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

}  // namespace affharm
