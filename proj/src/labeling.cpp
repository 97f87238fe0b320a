#include "affharm/labeling.hpp"

#include <deque>

namespace affharm {

static int pos_mod(int64_t v, int m) {
    int r = static_cast<int>(v % m);
    return r < 0 ? r + m : r;
}

// exponent e with |lambda| = base^e; requires an exact LogAbs
static int64_t lambda_exponent(const AffineElement& x, uint32_t& base_io) {
    LogAbs a = abs_value(x.lambda());
    if (!a.is_exact())
        throw InvalidGroupSpecError("lambda-exponent labeling needs |lambda| on a power lattice");
    if (a.k == 0) return 0;
    if (base_io == 0) base_io = a.base;
    if (a.base != base_io)
        throw InvalidGroupSpecError("lambda-exponent labeling: mixed bases in |lambda(G)|");
    return a.k;
}

CosetLabeling::CosetLabeling(const MeasuredGroup& g, Kind kind, int m) : kind_(kind), modulus_(m) {
    if (m < 1) throw InvalidGroupSpecError("labeling modulus must be >= 1");
    gen_shift_.reserve(g.support().size());
    for (const auto& e : g.support()) {
        if (kind_ == Kind::LambdaExpMod) {
            gen_shift_.push_back(pos_mod(lambda_exponent(e.element, base_), m));
        } else {
            const Rational& c = e.element.c().rational();
            if (!c.is_integer() || !e.element.lambda().is_one())
                throw InvalidGroupSpecError("parity labeling needs integer translations");
            gen_shift_.push_back(pos_mod(c.num().fits_int64() ? c.num().to_int64() : 0, m));
        }
    }
    action_.assign(static_cast<size_t>(m), std::vector<int>(g.support().size()));
    for (int l = 0; l < m; ++l)
        for (size_t s = 0; s < g.support().size(); ++s)
            action_[static_cast<size_t>(l)][s] = pos_mod(l + gen_shift_[s], m);
    // reachability of every coset from H
    std::vector<char> seen(static_cast<size_t>(m), 0);
    std::deque<int> q{0};
    seen[0] = 1;
    int reached = 1;
    while (!q.empty()) {
        int l = q.front();
        q.pop_front();
        for (size_t s = 0; s < g.support().size(); ++s) {
            int l2 = act(l, s);
            if (!seen[static_cast<size_t>(l2)]) {
                seen[static_cast<size_t>(l2)] = 1;
                ++reached;
                q.push_back(l2);
            }
        }
    }
    irreducible_ = reached == m;
}

CosetLabeling CosetLabeling::lambda_exp_mod(const MeasuredGroup& g, int m) {
    return CosetLabeling(g, Kind::LambdaExpMod, m);
}

CosetLabeling CosetLabeling::zline_parity(const MeasuredGroup& g) {
    return CosetLabeling(g, Kind::CParity, 2);
}

CosetLabeling CosetLabeling::parse(const MeasuredGroup& g, const std::string& spec) {
    if (spec == "parity") return zline_parity(g);
    if (spec.rfind("mod:", 0) == 0) {
        int m = std::stoi(spec.substr(4));
        return lambda_exp_mod(g, m);
    }
    throw InvalidGroupSpecError("unknown labeling \"" + spec + "\" (want parity or mod:m)");
}

std::string CosetLabeling::spec() const {
    return kind_ == Kind::CParity ? "parity" : "mod:" + std::to_string(modulus_);
}

int CosetLabeling::label(const AffineElement& x) const {
    if (kind_ == Kind::LambdaExpMod) {
        uint32_t base = base_;
        return pos_mod(lambda_exponent(x, base), modulus_);
    }
    const Rational& c = x.c().rational();
    if (!c.is_integer()) throw std::invalid_argument("parity label of a non-integer translation");
    BigInt::DivRem dr = c.num().divrem(BigInt(modulus_));
    int64_t rem = dr.rem.is_zero() ? 0 : dr.rem.to_int64();
    return pos_mod(rem, modulus_);
}

}  // namespace affharm
