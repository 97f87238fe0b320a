#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace affharm {

// Arbitrary-precision signed integer, sign-magnitude over 64-bit limbs
// (little endian, no high zero limbs, sign == 0 iff value == 0).
// Sizes in this project stay small (a few hundred bits), so schoolbook
// multiplication and Knuth division are plenty.
class BigInt {
public:
    BigInt() = default;
    BigInt(int64_t v);
    static BigInt from_uint64(uint64_t v);
    static BigInt from_string(const std::string& s);  // decimal, optional '-'

    bool is_zero() const { return sign_ == 0; }
    bool is_negative() const { return sign_ < 0; }
    bool is_one() const;
    int sign() const { return sign_; }

    // total order
    int compare(const BigInt& o) const;
    static int compare_magnitude(const BigInt& a, const BigInt& b);

    BigInt operator-() const;
    BigInt abs() const;

    BigInt operator+(const BigInt& o) const;
    BigInt operator-(const BigInt& o) const;
    BigInt operator*(const BigInt& o) const;

    // Truncated (round toward zero) division; q*o + r == *this, |r| < |o|.
    struct DivRem;
    DivRem divrem(const BigInt& o) const;
    BigInt operator/(const BigInt& o) const;
    BigInt operator%(const BigInt& o) const;

    BigInt shifted_left(uint32_t bits) const;

    static BigInt gcd(BigInt a, BigInt b);  // >= 0
    static BigInt pow(const BigInt& base, uint64_t e);

    // Number of trailing zero bits of the magnitude (0 for zero value).
    uint32_t trailing_zero_bits() const;
    uint64_t bit_length() const;

    // exact when the value fits, else clamped to +/-HUGE_VAL
    double to_double() const;
    // natural log of |value|; value must be nonzero
    double log_magnitude() const;

    // If |value| == base^k for the given base >= 2, returns k (>= 0), else -1.
    int64_t power_of(uint64_t base) const;

    bool fits_int64() const;
    int64_t to_int64() const;   // requires fits_int64()
    uint64_t to_uint64() const; // low 64 bits of the magnitude

    std::string to_string() const;
    size_t hash() const;

    bool operator==(const BigInt& o) const { return compare(o) == 0; }
    bool operator!=(const BigInt& o) const { return compare(o) != 0; }
    bool operator<(const BigInt& o) const { return compare(o) < 0; }
    bool operator<=(const BigInt& o) const { return compare(o) <= 0; }
    bool operator>(const BigInt& o) const { return compare(o) > 0; }
    bool operator>=(const BigInt& o) const { return compare(o) >= 0; }

    // limb-level accumulation support: *this += (term << 64*limb_offset),
    // magnitudes only, used by the walk kernel when rebuilding dyadic sums.
    void add_shifted_magnitude(uint64_t term, size_t limb_offset);
    void set_sign(int s);
    void trim();

private:
    static std::vector<uint64_t> add_mag(const std::vector<uint64_t>& a, const std::vector<uint64_t>& b);
    // requires |a| >= |b|
    static std::vector<uint64_t> sub_mag(const std::vector<uint64_t>& a, const std::vector<uint64_t>& b);
    static std::vector<uint64_t> mul_mag(const std::vector<uint64_t>& a, const std::vector<uint64_t>& b);
    static int cmp_mag(const std::vector<uint64_t>& a, const std::vector<uint64_t>& b);

    std::vector<uint64_t> limbs_;
    int sign_ = 0;
};

struct BigInt::DivRem {
    BigInt quot, rem;
};

inline BigInt BigInt::operator/(const BigInt& o) const { return divrem(o).quot; }
inline BigInt BigInt::operator%(const BigInt& o) const { return divrem(o).rem; }

}  // namespace affharm
