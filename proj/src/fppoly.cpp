#include "affharm/fppoly.hpp"

#include <algorithm>
#include <climits>
#include <sstream>
#include <stdexcept>

namespace affharm {

bool is_prime_u32(uint32_t n) {
    if (n < 2) return false;
    for (uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

FpPoly::FpPoly(uint32_t p, std::vector<uint32_t> coeffs) : p_(p), coeffs_(std::move(coeffs)) {
    for (auto& c : coeffs_) c %= p_;
    trim();
}

FpPoly FpPoly::constant(uint32_t p, int64_t c) {
    int64_t m = c % static_cast<int64_t>(p);
    if (m < 0) m += p;
    FpPoly r(p);
    if (m != 0) r.coeffs_ = {static_cast<uint32_t>(m)};
    return r;
}

FpPoly FpPoly::monomial(uint32_t p, int64_t c, uint32_t degree) {
    FpPoly r = constant(p, c);
    return r.times_xk(degree);
}

bool FpPoly::is_monomial() const {
    if (coeffs_.empty()) return false;
    for (size_t i = 0; i + 1 < coeffs_.size(); ++i)
        if (coeffs_[i] != 0) return false;
    return true;
}

void FpPoly::trim() {
    while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

uint32_t FpPoly::inv_mod(uint32_t a) const {
    // Fermat: a^(p-2) mod p
    uint64_t r = 1, b = a % p_, e = p_ - 2;
    while (e) {
        if (e & 1) r = r * b % p_;
        b = b * b % p_;
        e >>= 1;
    }
    return static_cast<uint32_t>(r);
}

FpPoly FpPoly::operator+(const FpPoly& o) const {
    FpPoly r(p_);
    r.coeffs_.resize(std::max(coeffs_.size(), o.coeffs_.size()), 0);
    for (size_t i = 0; i < r.coeffs_.size(); ++i)
        r.coeffs_[i] = (coeff(i) + static_cast<uint64_t>(o.coeff(i))) % p_;
    r.trim();
    return r;
}

FpPoly FpPoly::operator-(const FpPoly& o) const { return *this + (-o); }

FpPoly FpPoly::operator-() const {
    FpPoly r = *this;
    for (auto& c : r.coeffs_)
        if (c != 0) c = p_ - c;
    return r;
}

FpPoly FpPoly::operator*(const FpPoly& o) const {
    FpPoly r(p_);
    if (is_zero() || o.is_zero()) return r;
    r.coeffs_.assign(coeffs_.size() + o.coeffs_.size() - 1, 0);
    for (size_t i = 0; i < coeffs_.size(); ++i) {
        if (coeffs_[i] == 0) continue;
        for (size_t j = 0; j < o.coeffs_.size(); ++j) {
            r.coeffs_[i + j] = static_cast<uint32_t>(
                (r.coeffs_[i + j] + static_cast<uint64_t>(coeffs_[i]) * o.coeffs_[j]) % p_);
        }
    }
    r.trim();
    return r;
}

FpPoly FpPoly::times_xk(uint32_t k) const {
    if (is_zero() || k == 0) return *this;
    FpPoly r(p_);
    r.coeffs_.assign(k, 0);
    r.coeffs_.insert(r.coeffs_.end(), coeffs_.begin(), coeffs_.end());
    return r;
}

FpPoly::DivRem FpPoly::divrem(const FpPoly& o) const {
    if (o.is_zero()) throw std::domain_error("FpPoly: division by zero");
    DivRem out{FpPoly(p_), *this};
    if (degree() < o.degree()) return out;
    out.quot.coeffs_.assign(degree() - o.degree() + 1, 0);
    uint32_t lead_inv = inv_mod(o.lead());
    while (!out.rem.is_zero() && out.rem.degree() >= o.degree()) {
        int shift = out.rem.degree() - o.degree();
        uint32_t q = static_cast<uint32_t>(
            static_cast<uint64_t>(out.rem.lead()) * lead_inv % p_);
        out.quot.coeffs_[shift] = q;
        // rem -= q * x^shift * o
        for (size_t i = 0; i < o.coeffs_.size(); ++i) {
            uint64_t sub = static_cast<uint64_t>(q) * o.coeffs_[i] % p_;
            uint32_t& tgt = out.rem.coeffs_[i + shift];
            tgt = static_cast<uint32_t>((tgt + p_ - sub) % p_);
        }
        out.rem.trim();
    }
    out.quot.trim();
    return out;
}

FpPoly FpPoly::gcd(FpPoly a, FpPoly b) {
    while (!b.is_zero()) {
        FpPoly r = a.divrem(b).rem;
        a = std::move(b);
        b = std::move(r);
    }
    return a.monic();
}

FpPoly FpPoly::monic() const {
    if (is_zero() || lead() == 1) return *this;
    FpPoly r = *this;
    uint32_t inv = inv_mod(lead());
    for (auto& c : r.coeffs_) c = static_cast<uint32_t>(static_cast<uint64_t>(c) * inv % p_);
    return r;
}

size_t FpPoly::hash() const {
    size_t h = 14695981039346656037ULL ^ p_;
    for (uint32_t c : coeffs_) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

FpRatio::FpRatio(FpPoly num) : num_(std::move(num)), den_(FpPoly::constant(num_.p(), 1)) {}

FpRatio::FpRatio(FpPoly num, FpPoly den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) throw std::domain_error("FpRatio: zero denominator");
    normalize();
}

FpRatio FpRatio::constant(uint32_t p, int64_t c) { return FpRatio(FpPoly::constant(p, c)); }

FpRatio FpRatio::monomial(uint32_t p, int64_t c, int k) {
    if (k >= 0) return FpRatio(FpPoly::monomial(p, c, static_cast<uint32_t>(k)));
    return FpRatio(FpPoly::constant(p, c), FpPoly::monomial(p, 1, static_cast<uint32_t>(-k)));
}

void FpRatio::normalize() {
    if (num_.is_zero()) {
        den_ = FpPoly::constant(num_.p(), 1);
        return;
    }
    FpPoly g = FpPoly::gcd(num_, den_);
    if (g.degree() > 0) {
        num_ = num_.divrem(g).quot;
        den_ = den_.divrem(g).quot;
    }
    if (den_.lead() != 1) {
        // make denominator monic, folding the unit into the numerator
        FpPoly unit_inv = den_.monic();
        uint32_t lead = den_.lead();
        den_ = std::move(unit_inv);
        // num /= lead
        FpPoly scaled = num_.divrem(FpPoly::constant(num_.p(), lead)).quot;
        num_ = std::move(scaled);
    }
}

int FpRatio::degree_at_infinity() const {
    if (is_zero()) return INT_MIN;
    return num_.degree() - den_.degree();
}

FpRatio FpRatio::operator+(const FpRatio& o) const {
    return FpRatio(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
}
FpRatio FpRatio::operator-(const FpRatio& o) const {
    return FpRatio(num_ * o.den_ - o.num_ * den_, den_ * o.den_);
}
FpRatio FpRatio::operator*(const FpRatio& o) const {
    return FpRatio(num_ * o.num_, den_ * o.den_);
}
FpRatio FpRatio::operator/(const FpRatio& o) const {
    if (o.is_zero()) throw std::domain_error("FpRatio: division by zero");
    return FpRatio(num_ * o.den_, den_ * o.num_);
}
FpRatio FpRatio::operator-() const {
    FpRatio r = *this;
    r.num_ = -r.num_;
    return r;
}
FpRatio FpRatio::inverse() const {
    if (is_zero()) throw std::domain_error("FpRatio: inverse of zero");
    return FpRatio(den_, num_);
}

bool FpRatio::is_laurent() const { return den_.is_monomial(); }

static std::string sparse_poly_string(const FpPoly& poly, int shift) {
    if (poly.is_zero()) return "0";
    std::ostringstream out;
    bool first = true;
    for (int i = 0; i <= poly.degree(); ++i) {
        uint32_t c = poly.coeff(static_cast<size_t>(i));
        if (c == 0) continue;
        if (!first) out << " + ";
        first = false;
        int k = i + shift;
        if (k == 0) out << c;
        else if (c == 1) out << "x^" << k;
        else out << c << "*x^" << k;
    }
    return out.str();
}

std::string FpRatio::to_string() const {
    if (is_laurent()) return sparse_poly_string(num_, -den_.degree());
    return "(" + sparse_poly_string(num_, 0) + ")/(" + sparse_poly_string(den_, 0) + ")";
}

FpRatio FpRatio::parse(uint32_t p, const std::string& s) {
    // sparse sum of terms "c", "x^k", "c*x^k"; k may be negative
    auto fail = [&]() { throw std::invalid_argument("FpRatio: cannot parse \"" + s + "\""); };
    std::string t;
    for (char ch : s)
        if (!isspace(static_cast<unsigned char>(ch))) t += ch;
    if (t.empty()) fail();
    struct Term { int64_t c; int k; };
    std::vector<Term> terms;
    size_t i = 0;
    int pending_sign = 1;
    while (i < t.size()) {
        if (t[i] == '+') { pending_sign = 1; ++i; continue; }
        if (t[i] == '-') { pending_sign = -1; ++i; continue; }
        int64_t c = 1;
        bool have_coeff = false;
        if (isdigit(static_cast<unsigned char>(t[i]))) {
            size_t j = i;
            while (j < t.size() && isdigit(static_cast<unsigned char>(t[j]))) ++j;
            c = std::stoll(t.substr(i, j - i));
            have_coeff = true;
            i = j;
            if (i < t.size() && t[i] == '*') ++i;
        }
        int k = 0;
        if (i < t.size() && t[i] == 'x') {
            ++i;
            k = 1;
            if (i < t.size() && t[i] == '^') {
                ++i;
                size_t j = i;
                if (j < t.size() && (t[j] == '-' || t[j] == '+')) ++j;
                while (j < t.size() && isdigit(static_cast<unsigned char>(t[j]))) ++j;
                if (j == i) fail();
                k = std::stoi(t.substr(i, j - i));
                i = j;
            }
        } else if (!have_coeff) {
            fail();
        }
        terms.push_back({pending_sign * c, k});
        pending_sign = 1;
    }
    FpRatio acc = FpRatio::constant(p, 0);
    for (const Term& term : terms) acc = acc + FpRatio::monomial(p, term.c, term.k);
    return acc;
}

size_t FpRatio::hash() const {
    size_t h = num_.hash();
    h ^= den_.hash() + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

}  // namespace affharm
