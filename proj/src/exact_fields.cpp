#include "affharm/exact_fields.hpp"

#include <cmath>

namespace affharm {

Place Place::padic(uint32_t p) {
    if (!is_prime_u32(p)) throw std::invalid_argument("padic place: " + std::to_string(p) + " is not prime");
    return {Kind::PAdic, p};
}

Place Place::laurent_infinity(uint32_t p) {
    if (!is_prime_u32(p)) throw std::invalid_argument("laurent place: " + std::to_string(p) + " is not prime");
    return {Kind::LaurentInfinity, p};
}

Place Place::parse(const std::string& s) {
    if (s == "arch") return archimedean();
    auto colon = s.find(':');
    if (colon != std::string::npos) {
        std::string head = s.substr(0, colon);
        uint32_t p = static_cast<uint32_t>(std::stoul(s.substr(colon + 1)));
        if (head == "padic") return padic(p);
        if (head == "laurent") return laurent_infinity(p);
    }
    throw std::invalid_argument("unknown place \"" + s + "\"");
}

std::string Place::to_string() const {
    switch (kind) {
        case Kind::Archimedean: return "arch";
        case Kind::PAdic: return "padic:" + std::to_string(p);
        case Kind::LaurentInfinity: return "laurent:" + std::to_string(p);
    }
    return "?";
}

LogAbs LogAbs::exact(int64_t k, uint32_t base) {
    if (k == 0) return zero();
    return {Kind::Exact, k, base, 0.0};
}

double LogAbs::to_double() const {
    switch (kind) {
        case Kind::NegInf: return -HUGE_VAL;
        case Kind::Exact: return static_cast<double>(k) * std::log(static_cast<double>(base == 0 ? 2 : base));
        case Kind::Approx: return approx;
    }
    return 0.0;
}

LogAbs LogAbs::operator-() const {
    switch (kind) {
        case Kind::NegInf: return neg_inf();  // only ever negated via rho(0), never constructed
        case Kind::Exact: return exact(-k, base);
        case Kind::Approx: return from_double(-approx);
    }
    return zero();
}

LogAbs LogAbs::operator+(const LogAbs& o) const {
    if (kind == Kind::NegInf || o.kind == Kind::NegInf) return neg_inf();
    if (kind == Kind::Exact && o.kind == Kind::Exact) {
        if (k == 0) return o;
        if (o.k == 0) return *this;
        if (base == o.base) return exact(k + o.k, base);
    }
    return from_double(to_double() + o.to_double());
}

bool LogAbs::less_than(double threshold, double tol) const {
    if (kind == Kind::NegInf) return true;
    return to_double() < threshold + tol;
}

bool LogAbs::greater_than(double threshold, double tol) const {
    if (kind == Kind::NegInf) return false;
    return to_double() > threshold - tol;
}

bool LogAbs::operator==(const LogAbs& o) const {
    if (kind != o.kind) return false;
    if (kind == Kind::Exact) return k == o.k && (k == 0 || base == o.base);
    if (kind == Kind::Approx) return approx == o.approx;
    return true;
}

ValuedScalar::ValuedScalar(Place place, Rational v) : place_(place), value_(std::move(v)) {
    if (place_.kind == Place::Kind::LaurentInfinity)
        throw std::invalid_argument("rational value at a laurent place");
}

ValuedScalar::ValuedScalar(Place place, FpRatio v) : place_(place), value_(std::move(v)) {
    if (place_.kind != Place::Kind::LaurentInfinity)
        throw std::invalid_argument("laurent value at a rational place");
    if (std::get<FpRatio>(value_).p() != place_.p)
        throw std::invalid_argument("laurent value with mismatched characteristic");
}

ValuedScalar ValuedScalar::zero(const Place& place) { return integer(place, 0); }
ValuedScalar ValuedScalar::one(const Place& place) { return integer(place, 1); }

ValuedScalar ValuedScalar::integer(const Place& place, int64_t v) {
    if (place.kind == Place::Kind::LaurentInfinity)
        return ValuedScalar(place, FpRatio::constant(place.p, v));
    return ValuedScalar(place, Rational(v));
}

bool ValuedScalar::is_zero() const {
    return is_rational() ? rational().is_zero() : fp_ratio().is_zero();
}

bool ValuedScalar::is_one() const {
    return is_rational() ? rational().is_one() : fp_ratio().is_one();
}

void ValuedScalar::check_place(const ValuedScalar& o) const {
    if (place_ != o.place_)
        throw PlaceMismatchError("operands at different places: " + place_.to_string() +
                                 " vs " + o.place_.to_string());
}

ValuedScalar ValuedScalar::operator+(const ValuedScalar& o) const {
    check_place(o);
    if (is_rational()) return ValuedScalar(place_, rational() + o.rational());
    return ValuedScalar(place_, fp_ratio() + o.fp_ratio());
}

ValuedScalar ValuedScalar::operator-(const ValuedScalar& o) const {
    check_place(o);
    if (is_rational()) return ValuedScalar(place_, rational() - o.rational());
    return ValuedScalar(place_, fp_ratio() - o.fp_ratio());
}

ValuedScalar ValuedScalar::operator*(const ValuedScalar& o) const {
    check_place(o);
    if (is_rational()) return ValuedScalar(place_, rational() * o.rational());
    return ValuedScalar(place_, fp_ratio() * o.fp_ratio());
}

ValuedScalar ValuedScalar::operator-() const {
    if (is_rational()) return ValuedScalar(place_, -rational());
    return ValuedScalar(place_, -fp_ratio());
}

ValuedScalar ValuedScalar::inverse() const {
    if (is_zero()) throw std::domain_error("inverse of zero");
    if (is_rational()) return ValuedScalar(place_, rational().inverse());
    return ValuedScalar(place_, fp_ratio().inverse());
}

bool ValuedScalar::operator==(const ValuedScalar& o) const {
    if (place_ != o.place_) return false;
    if (is_rational() != o.is_rational()) return false;
    if (is_rational()) return rational() == o.rational();
    return fp_ratio() == o.fp_ratio();
}

std::string ValuedScalar::to_string() const {
    return is_rational() ? rational().to_string() : fp_ratio().to_string();
}

ValuedScalar ValuedScalar::parse(const Place& place, const std::string& s) {
    if (place.kind == Place::Kind::LaurentInfinity)
        return ValuedScalar(place, FpRatio::parse(place.p, s));
    return ValuedScalar(place, Rational::from_string(s));
}

size_t ValuedScalar::hash() const {
    size_t h = is_rational() ? rational().hash() : fp_ratio().hash();
    h ^= (static_cast<size_t>(place_.kind) * 0x9e3779b97f4a7c15ULL + place_.p);
    return h;
}

// p-adic valuation of a nonzero integer
static int64_t padic_val(const BigInt& n, uint32_t p) {
    BigInt cur = n.abs();
    BigInt bp(static_cast<int64_t>(p));
    int64_t v = 0;
    while (true) {
        BigInt::DivRem dr = cur.divrem(bp);
        if (!dr.rem.is_zero()) return v;
        cur = std::move(dr.quot);
        ++v;
    }
}

// Archimedean |q| is stored exactly when it is a power of a single small
// prime (the lambda-values of the built-in groups are powers of 2); other
// magnitudes fall back to a double log.
static LogAbs archimedean_log_abs(const Rational& q) {
    static const uint32_t small_primes[] = {2, 3, 5, 7, 11, 13};
    const BigInt& num = q.num();
    const BigInt& den = q.den();
    if (num.abs() == den) return LogAbs::zero();
    if (den.is_one()) {
        for (uint32_t b : small_primes) {
            int64_t k = num.power_of(b);
            if (k >= 0) return LogAbs::exact(k, b);
        }
    } else if (num.abs().is_one()) {
        for (uint32_t b : small_primes) {
            int64_t k = den.power_of(b);
            if (k >= 0) return LogAbs::exact(-k, b);
        }
    }
    return LogAbs::from_double(num.log_magnitude() - den.log_magnitude());
}

LogAbs abs_value(const ValuedScalar& a) {
    if (a.is_zero()) return LogAbs::neg_inf();
    switch (a.place().kind) {
        case Place::Kind::Archimedean:
            return archimedean_log_abs(a.rational());
        case Place::Kind::PAdic: {
            uint32_t p = a.place().p;
            int64_t v = padic_val(a.rational().num(), p) - padic_val(a.rational().den(), p);
            return LogAbs::exact(-v, p);
        }
        case Place::Kind::LaurentInfinity:
            return LogAbs::exact(a.fp_ratio().degree_at_infinity(), a.place().p);
    }
    return LogAbs::zero();
}

Rational abs_as_rational(const ValuedScalar& a) {
    if (a.is_zero()) return Rational(0);
    switch (a.place().kind) {
        case Place::Kind::Archimedean:
            return a.rational().abs();
        case Place::Kind::PAdic: {
            LogAbs l = abs_value(a);  // exact (k, p)
            BigInt p(static_cast<int64_t>(a.place().p));
            if (l.k >= 0) return Rational(BigInt::pow(p, static_cast<uint64_t>(l.k)), BigInt(1));
            return Rational(BigInt(1), BigInt::pow(p, static_cast<uint64_t>(-l.k)));
        }
        case Place::Kind::LaurentInfinity: {
            int deg = a.fp_ratio().degree_at_infinity();
            BigInt p(static_cast<int64_t>(a.place().p));
            if (deg >= 0) return Rational(BigInt::pow(p, static_cast<uint64_t>(deg)), BigInt(1));
            return Rational(BigInt(1), BigInt::pow(p, static_cast<uint64_t>(-deg)));
        }
    }
    return Rational(0);
}

int abs_compare(const ValuedScalar& a, const Rational& threshold) {
    return abs_as_rational(a).compare(threshold);
}

bool abs_less_than(const ValuedScalar& a, const Rational& threshold) {
    return abs_compare(a, threshold) < 0;
}

}  // namespace affharm
