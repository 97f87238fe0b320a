#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>

#include "affharm/fppoly.hpp"
#include "affharm/rational.hpp"

namespace affharm {

struct PlaceMismatchError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Where the absolute value comes from: usual archimedean |.| on Q, the
// p-adic one (|a| = p^{-v_p(a)}), or the degree valuation at infinity on
// F_p(x) (|f/g| = p^{deg f - deg g}).
struct Place {
    enum class Kind { Archimedean, PAdic, LaurentInfinity };
    Kind kind = Kind::Archimedean;
    uint32_t p = 0;  // prime for PAdic / LaurentInfinity

    static Place archimedean() { return {Kind::Archimedean, 0}; }
    static Place padic(uint32_t p);
    static Place laurent_infinity(uint32_t p);
    static Place parse(const std::string& s);  // "arch" | "padic:p" | "laurent:p"

    bool operator==(const Place& o) const { return kind == o.kind && p == o.p; }
    bool operator!=(const Place& o) const { return !(*this == o); }
    bool is_laurent() const { return kind == Kind::LaurentInfinity; }
    std::string to_string() const;
};

// log of a multiplicative absolute value. Exact k*log(base) form whenever
// the place makes |.| a power of a prime; plain double otherwise. Stopping
// rules compare these against real thresholds, so the exact form matters:
// it keeps rho arithmetic drift-free over millions of steps.
struct LogAbs {
    enum class Kind { NegInf, Exact, Approx };
    Kind kind = Kind::Exact;
    int64_t k = 0;        // Exact: value is k * log(base)
    uint32_t base = 0;    // 0 when k == 0 (exact zero)
    double approx = 0.0;  // Approx only

    static LogAbs neg_inf() { return {Kind::NegInf, 0, 0, 0.0}; }
    static LogAbs zero() { return {Kind::Exact, 0, 0, 0.0}; }
    static LogAbs exact(int64_t k, uint32_t base);
    static LogAbs from_double(double v) { return {Kind::Approx, 0, 0, v}; }

    bool is_neg_inf() const { return kind == Kind::NegInf; }
    bool is_exact() const { return kind == Kind::Exact; }
    bool is_zero() const { return kind == Kind::Exact && k == 0; }
    double to_double() const;

    LogAbs operator-() const;
    // exact+exact with a common base stays exact; anything else degrades
    LogAbs operator+(const LogAbs& o) const;

    // comparison against a real threshold; exact forms are evaluated in
    // double with |k| small, tolerance 1e-9 absorbs the rounding
    bool less_than(double threshold, double tol = 1e-9) const;
    bool greater_than(double threshold, double tol = 1e-9) const;

    bool operator==(const LogAbs& o) const;
};

// An exact field element together with its place.
class ValuedScalar {
public:
    ValuedScalar() : place_(Place::archimedean()), value_(Rational()) {}
    ValuedScalar(Place place, Rational v);
    ValuedScalar(Place place, FpRatio v);

    static ValuedScalar zero(const Place& place);
    static ValuedScalar one(const Place& place);
    static ValuedScalar integer(const Place& place, int64_t v);

    const Place& place() const { return place_; }
    bool is_zero() const;
    bool is_one() const;
    bool is_rational() const { return std::holds_alternative<Rational>(value_); }
    const Rational& rational() const { return std::get<Rational>(value_); }
    const FpRatio& fp_ratio() const { return std::get<FpRatio>(value_); }

    ValuedScalar operator+(const ValuedScalar& o) const;
    ValuedScalar operator-(const ValuedScalar& o) const;
    ValuedScalar operator*(const ValuedScalar& o) const;
    ValuedScalar operator-() const;
    ValuedScalar inverse() const;

    bool operator==(const ValuedScalar& o) const;
    bool operator!=(const ValuedScalar& o) const { return !(*this == o); }

    std::string to_string() const;
    static ValuedScalar parse(const Place& place, const std::string& s);
    size_t hash() const;

private:
    void check_place(const ValuedScalar& o) const;
    Place place_;
    std::variant<Rational, FpRatio> value_;
};

// log|a| at a's place; |0| maps to the -inf sentinel.
LogAbs abs_value(const ValuedScalar& a);

// |a| compared exactly against a non-negative rational threshold
// (decides events like |c| < 3 without float error); returns -1/0/+1
int abs_compare(const ValuedScalar& a, const Rational& threshold);
bool abs_less_than(const ValuedScalar& a, const Rational& threshold);

// |a| as an exact rational (a power of p at non-archimedean places)
Rational abs_as_rational(const ValuedScalar& a);

}  // namespace affharm
