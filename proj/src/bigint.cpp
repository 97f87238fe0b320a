#include "affharm/bigint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace affharm {

using u64 = uint64_t;
using u128 = unsigned __int128;

BigInt::BigInt(int64_t v) {
    if (v == 0) return;
    sign_ = v < 0 ? -1 : 1;
    u64 mag = v < 0 ? ~static_cast<u64>(v) + 1 : static_cast<u64>(v);
    limbs_.push_back(mag);
}

BigInt BigInt::from_uint64(u64 v) {
    BigInt r;
    if (v != 0) {
        r.sign_ = 1;
        r.limbs_.push_back(v);
    }
    return r;
}

BigInt BigInt::from_string(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("BigInt: empty string");
    size_t i = 0;
    int sign = 1;
    if (s[0] == '-') { sign = -1; i = 1; }
    else if (s[0] == '+') { i = 1; }
    if (i == s.size()) throw std::invalid_argument("BigInt: no digits");
    BigInt r;
    BigInt ten(10);
    for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9')
            throw std::invalid_argument("BigInt: bad digit in \"" + s + "\"");
        r = r * ten + BigInt(s[i] - '0');
    }
    if (!r.is_zero()) r.sign_ = sign;
    return r;
}

bool BigInt::is_one() const { return sign_ == 1 && limbs_.size() == 1 && limbs_[0] == 1; }

void BigInt::trim() {
    while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
    if (limbs_.empty()) sign_ = 0;
}

void BigInt::set_sign(int s) {
    if (limbs_.empty()) { sign_ = 0; return; }
    sign_ = s < 0 ? -1 : 1;
}

int BigInt::cmp_mag(const std::vector<u64>& a, const std::vector<u64>& b) {
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    for (size_t i = a.size(); i-- > 0;) {
        if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    }
    return 0;
}

int BigInt::compare_magnitude(const BigInt& a, const BigInt& b) { return cmp_mag(a.limbs_, b.limbs_); }

int BigInt::compare(const BigInt& o) const {
    if (sign_ != o.sign_) return sign_ < o.sign_ ? -1 : 1;
    int m = cmp_mag(limbs_, o.limbs_);
    return sign_ >= 0 ? m : -m;
}

BigInt BigInt::operator-() const {
    BigInt r = *this;
    r.sign_ = -r.sign_;
    return r;
}

BigInt BigInt::abs() const {
    BigInt r = *this;
    if (r.sign_ < 0) r.sign_ = 1;
    return r;
}

std::vector<u64> BigInt::add_mag(const std::vector<u64>& a, const std::vector<u64>& b) {
    const std::vector<u64>& x = a.size() >= b.size() ? a : b;
    const std::vector<u64>& y = a.size() >= b.size() ? b : a;
    std::vector<u64> r(x.size() + 1, 0);
    u64 carry = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        u128 s = static_cast<u128>(x[i]) + (i < y.size() ? y[i] : 0) + carry;
        r[i] = static_cast<u64>(s);
        carry = static_cast<u64>(s >> 64);
    }
    r[x.size()] = carry;
    while (!r.empty() && r.back() == 0) r.pop_back();
    return r;
}

std::vector<u64> BigInt::sub_mag(const std::vector<u64>& a, const std::vector<u64>& b) {
    std::vector<u64> r(a.size(), 0);
    u64 borrow = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        u64 bi = i < b.size() ? b[i] : 0;
        u64 t = a[i] - bi;
        u64 b2 = a[i] < bi;
        u64 t2 = t - borrow;
        if (t < borrow) b2 = 1;
        r[i] = t2;
        borrow = b2;
    }
    while (!r.empty() && r.back() == 0) r.pop_back();
    return r;
}

std::vector<u64> BigInt::mul_mag(const std::vector<u64>& a, const std::vector<u64>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<u64> r(a.size() + b.size(), 0);
    for (size_t i = 0; i < a.size(); ++i) {
        u64 carry = 0;
        for (size_t j = 0; j < b.size(); ++j) {
            u128 cur = static_cast<u128>(a[i]) * b[j] + r[i + j] + carry;
            r[i + j] = static_cast<u64>(cur);
            carry = static_cast<u64>(cur >> 64);
        }
        r[i + b.size()] += carry;
    }
    while (!r.empty() && r.back() == 0) r.pop_back();
    return r;
}

BigInt BigInt::operator+(const BigInt& o) const {
    if (is_zero()) return o;
    if (o.is_zero()) return *this;
    BigInt r;
    if (sign_ == o.sign_) {
        r.limbs_ = add_mag(limbs_, o.limbs_);
        r.sign_ = sign_;
    } else {
        int c = cmp_mag(limbs_, o.limbs_);
        if (c == 0) return BigInt();
        if (c > 0) {
            r.limbs_ = sub_mag(limbs_, o.limbs_);
            r.sign_ = sign_;
        } else {
            r.limbs_ = sub_mag(o.limbs_, limbs_);
            r.sign_ = o.sign_;
        }
    }
    return r;
}

BigInt BigInt::operator-(const BigInt& o) const { return *this + (-o); }

BigInt BigInt::operator*(const BigInt& o) const {
    BigInt r;
    r.limbs_ = mul_mag(limbs_, o.limbs_);
    r.sign_ = limbs_.empty() || o.limbs_.empty() ? 0 : sign_ * o.sign_;
    if (r.limbs_.empty()) r.sign_ = 0;
    return r;
}

static int nlz64(u64 x) {
    return x == 0 ? 64 : __builtin_clzll(x);
}

BigInt::DivRem BigInt::divrem(const BigInt& o) const {
    if (o.is_zero()) throw std::domain_error("BigInt: division by zero");
    DivRem out;
    int mc = cmp_mag(limbs_, o.limbs_);
    if (mc < 0) {
        out.rem = *this;
        return out;
    }
    // single-limb divisor fast path
    if (o.limbs_.size() == 1) {
        u64 d = o.limbs_[0];
        std::vector<u64> q(limbs_.size(), 0);
        u64 rem = 0;
        for (size_t i = limbs_.size(); i-- > 0;) {
            u128 cur = (static_cast<u128>(rem) << 64) | limbs_[i];
            q[i] = static_cast<u64>(cur / d);
            rem = static_cast<u64>(cur % d);
        }
        out.quot.limbs_ = std::move(q);
        out.quot.trim();
        out.quot.sign_ = out.quot.limbs_.empty() ? 0 : sign_ * o.sign_;
        if (rem != 0) {
            out.rem.limbs_ = {rem};
            out.rem.sign_ = sign_;
        }
        return out;
    }
    // Knuth algorithm D
    size_t n = o.limbs_.size(), m = limbs_.size() - n;
    int s = nlz64(o.limbs_[n - 1]);
    std::vector<u64> vn(n), un(limbs_.size() + 1, 0);
    for (size_t i = n; i-- > 1;)
        vn[i] = (o.limbs_[i] << s) | (s ? (o.limbs_[i - 1] >> (64 - s)) : 0);
    vn[0] = o.limbs_[0] << s;
    un[limbs_.size()] = s ? (limbs_.back() >> (64 - s)) : 0;
    for (size_t i = limbs_.size(); i-- > 1;)
        un[i] = (limbs_[i] << s) | (s ? (limbs_[i - 1] >> (64 - s)) : 0);
    un[0] = limbs_[0] << s;

    std::vector<u64> q(m + 1, 0);
    for (size_t j = m + 1; j-- > 0;) {
        u128 num = (static_cast<u128>(un[j + n]) << 64) | un[j + n - 1];
        u128 qhat = num / vn[n - 1];
        u128 rhat = num % vn[n - 1];
        while (qhat > std::numeric_limits<u64>::max() ||
               qhat * vn[n - 2] > ((rhat << 64) | un[j + n - 2])) {
            qhat -= 1;
            rhat += vn[n - 1];
            if (rhat > std::numeric_limits<u64>::max()) break;
        }
        // multiply and subtract
        u128 borrow = 0, carry = 0;
        for (size_t i = 0; i < n; ++i) {
            u128 p = qhat * vn[i] + carry;
            carry = p >> 64;
            u64 pl = static_cast<u64>(p);
            u64 t = un[i + j] - pl;
            u128 b2 = un[i + j] < pl;
            u64 t2 = t - static_cast<u64>(borrow);
            if (t < static_cast<u64>(borrow)) b2 += 1;
            un[i + j] = t2;
            borrow = b2;
        }
        u128 top = static_cast<u128>(un[j + n]) - carry - borrow;
        un[j + n] = static_cast<u64>(top);
        if (static_cast<int64_t>(top >> 64) < 0) {
            // qhat was one too large: add back
            qhat -= 1;
            u64 c2 = 0;
            for (size_t i = 0; i < n; ++i) {
                u128 sum = static_cast<u128>(un[i + j]) + vn[i] + c2;
                un[i + j] = static_cast<u64>(sum);
                c2 = static_cast<u64>(sum >> 64);
            }
            un[j + n] += c2;
        }
        q[j] = static_cast<u64>(qhat);
    }
    out.quot.limbs_ = std::move(q);
    out.quot.trim();
    out.quot.sign_ = out.quot.limbs_.empty() ? 0 : sign_ * o.sign_;
    std::vector<u64> rl(n);
    for (size_t i = 0; i < n - 1; ++i)
        rl[i] = (un[i] >> s) | (s ? (un[i + 1] << (64 - s)) : 0);
    rl[n - 1] = un[n - 1] >> s;
    out.rem.limbs_ = std::move(rl);
    out.rem.trim();
    out.rem.sign_ = out.rem.limbs_.empty() ? 0 : sign_;
    return out;
}

BigInt BigInt::shifted_left(uint32_t bits) const {
    if (is_zero() || bits == 0) return *this;
    BigInt r;
    r.sign_ = sign_;
    size_t word = bits / 64;
    uint32_t rem = bits % 64;
    r.limbs_.assign(limbs_.size() + word + 1, 0);
    for (size_t i = 0; i < limbs_.size(); ++i) {
        r.limbs_[i + word] |= rem ? (limbs_[i] << rem) : limbs_[i];
        if (rem) r.limbs_[i + word + 1] |= limbs_[i] >> (64 - rem);
    }
    r.trim();
    return r;
}

BigInt BigInt::gcd(BigInt a, BigInt b) {
    a.sign_ = a.limbs_.empty() ? 0 : 1;
    b.sign_ = b.limbs_.empty() ? 0 : 1;
    while (!b.is_zero()) {
        BigInt r = a % b;
        a = std::move(b);
        b = std::move(r);
        if (!b.limbs_.empty()) b.sign_ = 1;
    }
    return a;
}

BigInt BigInt::pow(const BigInt& base, uint64_t e) {
    BigInt r(1), b = base;
    while (e) {
        if (e & 1) r = r * b;
        e >>= 1;
        if (e) b = b * b;
    }
    return r;
}

uint32_t BigInt::trailing_zero_bits() const {
    if (is_zero()) return 0;
    uint32_t z = 0;
    for (size_t i = 0; i < limbs_.size(); ++i) {
        if (limbs_[i] == 0) { z += 64; continue; }
        return z + __builtin_ctzll(limbs_[i]);
    }
    return z;
}

uint64_t BigInt::bit_length() const {
    if (is_zero()) return 0;
    return 64 * limbs_.size() - nlz64(limbs_.back());
}

double BigInt::to_double() const {
    if (is_zero()) return 0.0;
    double v = 0.0;
    size_t top = limbs_.size();
    size_t lo = top > 2 ? top - 2 : 0;
    for (size_t i = top; i-- > lo;)
        v = v * 18446744073709551616.0 + static_cast<double>(limbs_[i]);
    v = std::ldexp(v, static_cast<int>(64 * lo));
    return sign_ < 0 ? -v : v;
}

double BigInt::log_magnitude() const {
    if (is_zero()) throw std::domain_error("BigInt: log of zero");
    size_t top = limbs_.size();
    size_t lo = top > 2 ? top - 2 : 0;
    double v = 0.0;
    for (size_t i = top; i-- > lo;)
        v = v * 18446744073709551616.0 + static_cast<double>(limbs_[i]);
    return std::log(v) + 64.0 * static_cast<double>(lo) * 0.69314718055994530942;
}

int64_t BigInt::power_of(uint64_t base) const {
    if (base < 2 || is_zero()) return -1;
    BigInt b = from_uint64(base);
    BigInt cur = abs();
    int64_t k = 0;
    while (!cur.is_one()) {
        DivRem dr = cur.divrem(b);
        if (!dr.rem.is_zero()) return -1;
        cur = std::move(dr.quot);
        ++k;
    }
    return k;
}

bool BigInt::fits_int64() const {
    if (limbs_.size() > 1) return false;
    if (limbs_.empty()) return true;
    if (sign_ > 0) return limbs_[0] <= static_cast<u64>(std::numeric_limits<int64_t>::max());
    return limbs_[0] <= static_cast<u64>(std::numeric_limits<int64_t>::max()) + 1;
}

int64_t BigInt::to_int64() const {
    if (is_zero()) return 0;
    if (sign_ > 0) return static_cast<int64_t>(limbs_[0]);
    return -static_cast<int64_t>(limbs_[0] - 1) - 1;
}

uint64_t BigInt::to_uint64() const { return limbs_.empty() ? 0 : limbs_[0]; }

std::string BigInt::to_string() const {
    if (is_zero()) return "0";
    BigInt cur = abs();
    const BigInt chunk(1000000000000000000LL);  // 10^18
    std::vector<std::string> parts;
    while (!cur.is_zero()) {
        DivRem dr = cur.divrem(chunk);
        parts.push_back(std::to_string(dr.rem.is_zero() ? 0LL : dr.rem.to_int64()));
        cur = std::move(dr.quot);
    }
    std::string out = sign_ < 0 ? "-" : "";
    out += parts.back();
    for (size_t i = parts.size() - 1; i-- > 0;) {
        out += std::string(18 - parts[i].size(), '0');
        out += parts[i];
    }
    return out;
}

size_t BigInt::hash() const {
    size_t h = 1469598103934665603ULL ^ static_cast<size_t>(sign_ + 2);
    for (u64 l : limbs_) {
        h ^= static_cast<size_t>(l);
        h *= 1099511628211ULL;
    }
    return h;
}

void BigInt::add_shifted_magnitude(uint64_t term, size_t limb_offset) {
    if (term == 0) return;
    if (limbs_.size() < limb_offset + 2) limbs_.resize(limb_offset + 2, 0);
    u128 s = static_cast<u128>(limbs_[limb_offset]) + term;
    limbs_[limb_offset] = static_cast<u64>(s);
    u64 carry = static_cast<u64>(s >> 64);
    size_t i = limb_offset + 1;
    while (carry) {
        if (i >= limbs_.size()) limbs_.push_back(0);
        u128 s2 = static_cast<u128>(limbs_[i]) + carry;
        limbs_[i] = static_cast<u64>(s2);
        carry = static_cast<u64>(s2 >> 64);
        ++i;
    }
    if (sign_ == 0) sign_ = 1;
}

}  // namespace affharm
