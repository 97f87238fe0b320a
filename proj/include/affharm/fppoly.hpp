#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace affharm {

// Dense polynomial over F_p, p an odd-or-2 prime < 2^31. Coefficients live in
// machine words; coeffs_[i] is the coefficient of x^i, no high zeros.
class FpPoly {
public:
    FpPoly() : p_(2) {}
    explicit FpPoly(uint32_t p) : p_(p) {}
    FpPoly(uint32_t p, std::vector<uint32_t> coeffs);
    static FpPoly constant(uint32_t p, int64_t c);
    static FpPoly monomial(uint32_t p, int64_t c, uint32_t degree);

    uint32_t p() const { return p_; }
    bool is_zero() const { return coeffs_.empty(); }
    bool is_one() const { return coeffs_.size() == 1 && coeffs_[0] == 1; }
    // degree of the zero polynomial is -1 by convention
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    uint32_t coeff(size_t i) const { return i < coeffs_.size() ? coeffs_[i] : 0; }
    uint32_t lead() const { return coeffs_.back(); }
    bool is_monomial() const;

    FpPoly operator+(const FpPoly& o) const;
    FpPoly operator-(const FpPoly& o) const;
    FpPoly operator*(const FpPoly& o) const;
    FpPoly operator-() const;
    FpPoly times_xk(uint32_t k) const;

    struct DivRem;
    DivRem divrem(const FpPoly& o) const;
    static FpPoly gcd(FpPoly a, FpPoly b);  // monic
    FpPoly monic() const;

    bool operator==(const FpPoly& o) const { return p_ == o.p_ && coeffs_ == o.coeffs_; }
    bool operator!=(const FpPoly& o) const { return !(*this == o); }

    size_t hash() const;

private:
    void trim();
    uint32_t inv_mod(uint32_t a) const;
    uint32_t p_;
    std::vector<uint32_t> coeffs_;
};

struct FpPoly::DivRem {
    FpPoly quot, rem;
};

// Ratio of two FpPolys in normal form: denominator monic, gcd-reduced,
// nonzero. Covers Laurent polynomials (denominator a power of x) and the
// general fractions field arithmetic produces.
class FpRatio {
public:
    FpRatio() : num_(2), den_(FpPoly::constant(2, 1)) {}
    explicit FpRatio(FpPoly num);
    FpRatio(FpPoly num, FpPoly den);
    static FpRatio constant(uint32_t p, int64_t c);
    // c * x^k, k may be negative
    static FpRatio monomial(uint32_t p, int64_t c, int k);

    uint32_t p() const { return num_.p(); }
    const FpPoly& num() const { return num_; }
    const FpPoly& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_one() const { return num_.is_one() && den_.is_one(); }

    // valuation at the place at infinity: deg num - deg den (INT32_MIN for 0)
    int degree_at_infinity() const;

    FpRatio operator+(const FpRatio& o) const;
    FpRatio operator-(const FpRatio& o) const;
    FpRatio operator*(const FpRatio& o) const;
    FpRatio operator/(const FpRatio& o) const;
    FpRatio operator-() const;
    FpRatio inverse() const;

    bool operator==(const FpRatio& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const FpRatio& o) const { return !(*this == o); }

    // true iff the value is a Laurent polynomial (denominator x^m)
    bool is_laurent() const;
    // sparse "c_k*x^k + ..." when Laurent, otherwise "(num)/(den)"
    std::string to_string() const;
    static FpRatio parse(uint32_t p, const std::string& s);

    size_t hash() const;

private:
    void normalize();
    FpPoly num_, den_;
};

bool is_prime_u32(uint32_t n);

}  // namespace affharm
