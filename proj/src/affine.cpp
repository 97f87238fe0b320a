#include "affharm/affine.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace affharm {

AffineElement::AffineElement(ValuedScalar c, ValuedScalar lambda)
    : c_(std::move(c)), lambda_(std::move(lambda)) {
    if (c_.place() != lambda_.place())
        throw PlaceMismatchError("affine element with mixed places");
    if (lambda_.is_zero()) throw std::invalid_argument("affine element requires lambda != 0");
}

AffineElement AffineElement::identity(const Place& place) {
    return AffineElement(ValuedScalar::zero(place), ValuedScalar::one(place));
}

AffineElement AffineElement::operator*(const AffineElement& o) const {
    // c(xy) = c(x) + lambda(x) c(y), lambda(xy) = lambda(x) lambda(y)
    return AffineElement(c_ + lambda_ * o.c_, lambda_ * o.lambda_);
}

AffineElement AffineElement::inverse() const {
    ValuedScalar linv = lambda_.inverse();
    return AffineElement(-(linv * c_), linv);
}

std::string AffineElement::to_string() const {
    return "(" + c_.to_string() + "; " + lambda_.to_string() + ")";
}

AffineElement AffineElement::parse(const Place& place, const std::string& s) {
    size_t open = s.find('(');
    size_t sep = s.find(';');
    size_t close = s.rfind(')');
    if (open == std::string::npos || sep == std::string::npos || close == std::string::npos ||
        !(open < sep && sep < close))
        throw std::invalid_argument("element literal must look like \"(c; lambda)\": " + s);
    auto strip = [](std::string t) {
        size_t b = t.find_first_not_of(" \t");
        size_t e = t.find_last_not_of(" \t");
        if (b == std::string::npos) return std::string();
        return t.substr(b, e - b + 1);
    };
    return AffineElement(ValuedScalar::parse(place, strip(s.substr(open + 1, sep - open - 1))),
                         ValuedScalar::parse(place, strip(s.substr(sep + 1, close - sep - 1))));
}

size_t AffineElement::hash() const {
    size_t h = c_.hash();
    h ^= lambda_.hash() + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

LogAbs rho(const AffineElement& x) { return -abs_value(x.lambda()); }

Word parse_word(const std::string& text) {
    Word w;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) {
        size_t caret = tok.find('^');
        WordToken t;
        if (caret == std::string::npos) {
            t.label = tok;
        } else {
            t.label = tok.substr(0, caret);
            std::string e = tok.substr(caret + 1);
            try {
                size_t used = 0;
                t.exponent = std::stoll(e, &used);
                if (used != e.size()) throw std::invalid_argument(e);
            } catch (const std::exception&) {
                throw MalformedWordError("bad exponent in token \"" + tok + "\"");
            }
        }
        if (t.label.empty()) throw MalformedWordError("empty label in word \"" + text + "\"");
        w.push_back(std::move(t));
    }
    return w;
}

MeasuredGroup::MeasuredGroup(std::string name, Place place, std::vector<Entry> support)
    : name_(std::move(name)), place_(place), support_(std::move(support)) {
    if (support_.empty()) throw InvalidGroupSpecError("empty generating set");
    inverse_of_.resize(support_.size());
    for (size_t i = 0; i < support_.size(); ++i) {
        AffineElement inv = support_[i].element.inverse();
        size_t j = 0;
        for (; j < support_.size(); ++j)
            if (support_[j].element == inv) break;
        if (j == support_.size())
            throw InvalidGroupSpecError("generating set not closed under inverse at \"" +
                                        support_[i].label + "\"");
        inverse_of_[i] = j;
    }
    check_invariants();
    virtually_abelian_ = true;
    for (const Entry& e : support_) {
        if (!rho(e.element).is_zero()) {
            virtually_abelian_ = false;
            break;
        }
    }
    detect_power_basis();
}

void MeasuredGroup::check_invariants() const {
    Rational total;
    for (size_t i = 0; i < support_.size(); ++i) {
        const Entry& e = support_[i];
        if (e.element.place() != place_) throw InvalidGroupSpecError("generator at wrong place");
        if (e.weight.sign() <= 0) throw InvalidGroupSpecError("mu weights must be positive");
        if (support_[inverse_of_[i]].weight != e.weight)
            throw InvalidGroupSpecError("mu is not symmetric at \"" + e.label + "\"");
        total = total + e.weight;
    }
    if (!total.is_one()) throw InvalidGroupSpecError("mu weights must sum to 1");
}

void MeasuredGroup::detect_power_basis() {
    PowerBasis pb;
    bool laurent = place_.is_laurent();
    // candidate base: archimedean groups use 2 (covers the built-ins and any
    // dyadic lambda lattice), laurent places use p
    pb.base = laurent ? place_.p : 2;
    for (const Entry& e : support_) {
        int32_t lexp = 0, cunit = 0;
        if (laurent) {
            const FpRatio& lam = e.element.lambda().fp_ratio();
            if (!lam.is_laurent() || !lam.num().is_monomial() || lam.num().lead() != 1) return;
            lexp = lam.degree_at_infinity();
            const FpRatio& c = e.element.c().fp_ratio();
            if (!c.is_zero()) {
                if (c.den().degree() != 0 || c.num().degree() != 0) return;
                cunit = static_cast<int32_t>(c.num().coeff(0));
            }
        } else {
            const Rational& lam = e.element.lambda().rational();
            if (lam.sign() <= 0) return;
            if (lam.num().is_one() && lam.den().is_one()) {
                lexp = 0;
            } else if (lam.den().is_one()) {
                int64_t k = lam.num().power_of(pb.base);
                if (k < 0) return;
                lexp = static_cast<int32_t>(k);
            } else if (lam.num().is_one()) {
                int64_t k = lam.den().power_of(pb.base);
                if (k < 0) return;
                lexp = static_cast<int32_t>(-k);
            } else {
                return;
            }
            const Rational& c = e.element.c().rational();
            if (!c.is_zero()) {
                if (!c.is_integer() || !c.num().abs().is_one()) return;
                cunit = c.sign();
            }
        }
        pb.lambda_exp.push_back(lexp);
        pb.c_unit.push_back(cunit);
    }
    power_basis_ = std::move(pb);
}

AffineElement MeasuredGroup::evaluate(const Word& w) const {
    AffineElement acc = AffineElement::identity(place_);
    for (const WordToken& t : w) {
        size_t i = find_entry(t.label);
        if (i == static_cast<size_t>(-1))
            throw MalformedWordError("unknown generator \"" + t.label + "\" in group " + name_);
        AffineElement g = support_[i].element;
        int64_t e = t.exponent;
        if (e < 0) {
            g = g.inverse();
            e = -e;
        }
        for (int64_t k = 0; k < e; ++k) acc = acc * g;
    }
    return acc;
}

AffineElement MeasuredGroup::evaluate(const std::string& word_text) const {
    return evaluate(parse_word(word_text));
}

size_t MeasuredGroup::find_entry(const std::string& label) const {
    for (size_t i = 0; i < support_.size(); ++i)
        if (support_[i].label == label) return i;
    return static_cast<size_t>(-1);
}

BallIndex::BallIndex(const MeasuredGroup& g, int radius, size_t node_budget) : radius_(radius) {
    AffineElement id = AffineElement::identity(g.place());
    dist_.emplace(id, 0);
    elements_.push_back(id);
    std::deque<AffineElement> frontier{id};
    int level = 0;
    while (!frontier.empty() && level < radius) {
        std::deque<AffineElement> next;
        for (const AffineElement& x : frontier) {
            for (const auto& e : g.support()) {
                AffineElement y = x * e.element;
                if (dist_.find(y) != dist_.end()) continue;
                if (dist_.size() >= node_budget)
                    throw BallBudgetError("ball node budget exceeded at radius " +
                                          std::to_string(level + 1));
                dist_.emplace(y, level + 1);
                elements_.push_back(y);
                next.push_back(std::move(y));
            }
        }
        frontier = std::move(next);
        ++level;
    }
}

std::optional<int> BallIndex::distance(const AffineElement& x) const {
    auto it = dist_.find(x);
    if (it == dist_.end()) return std::nullopt;
    return it->second;
}

std::vector<AffineElement> BallIndex::sphere(int r) const {
    std::vector<AffineElement> out;
    for (const AffineElement& x : elements_)
        if (*distance(x) == r) out.push_back(x);
    return out;
}

std::optional<int> word_length(const MeasuredGroup& g, const AffineElement& x, int radius_cap,
                               size_t node_budget) {
    if (x.is_identity()) return 0;
    BallIndex ball(g, radius_cap, node_budget);
    return ball.distance(x);
}

MeasuredGroup normalize_presentation(const MeasuredGroup& g) {
    if (g.virtually_abelian())
        throw VirtuallyAbelianError("all generators of " + g.name() +
                                    " have |lambda| = 1: group is virtually abelian");
    // prefer an entry already in (0, lambda) form with |lambda| > 1
    auto expanding = [&](size_t i) {
        LogAbs r = rho(g.support()[i].element);
        return !r.is_zero() && r.less_than(0.0, 0.0);
    };
    for (size_t i = 0; i < g.support().size(); ++i) {
        if (expanding(i) && g.support()[i].element.c().is_zero()) {
            MeasuredGroup out = g;
            out.set_x_index(i);
            return out;
        }
    }
    size_t pivot = static_cast<size_t>(-1);
    for (size_t i = 0; i < g.support().size(); ++i) {
        if (expanding(i)) {
            pivot = i;
            break;
        }
    }
    if (pivot == static_cast<size_t>(-1))
        throw VirtuallyAbelianError("no generator with |lambda| > 1 in " + g.name());
    const AffineElement& piv = g.support()[pivot].element;
    // w = ((1-lambda)^{-1} c, 1); then w^{-1} (c,lambda) w = (0, lambda)
    ValuedScalar one = ValuedScalar::one(g.place());
    ValuedScalar d = (one - piv.lambda()).inverse() * piv.c();
    AffineElement w(d, one);
    AffineElement winv = w.inverse();
    std::vector<MeasuredGroup::Entry> conj;
    conj.reserve(g.support().size());
    for (const auto& e : g.support())
        conj.push_back({e.label, winv * e.element * w, e.weight});
    MeasuredGroup out(g.name() + "~", g.place(), std::move(conj));
    out.set_x_index(pivot);
    if (g.z_index()) out.set_z_index(*g.z_index());
    return out;
}

static MeasuredGroup make_bs12() {
    Place place = Place::archimedean();
    auto rat = [&](int64_t n, int64_t d) {
        return ValuedScalar(place, Rational(BigInt(n), BigInt(d)));
    };
    Rational q(BigInt(1), BigInt(4));
    std::vector<MeasuredGroup::Entry> sup = {
        {"a", AffineElement(rat(0, 1), rat(2, 1)), q},
        {"a^-1", AffineElement(rat(0, 1), rat(1, 2)), q},
        {"b", AffineElement(rat(1, 1), rat(1, 1)), q},
        {"b^-1", AffineElement(rat(-1, 1), rat(1, 1)), q},
    };
    MeasuredGroup g("bs12", place, std::move(sup));
    g.set_x_index(0);  // a = (0,2)
    g.set_z_index(2);  // b = (1,1)
    return g;
}

static MeasuredGroup make_lamplighter(uint32_t p) {
    Place place = Place::laurent_infinity(p);
    auto mono = [&](int64_t c, int k) { return ValuedScalar(place, FpRatio::monomial(p, c, k)); };
    auto cnst = [&](int64_t c) { return ValuedScalar(place, FpRatio::constant(p, c)); };
    std::vector<MeasuredGroup::Entry> sup;
    if (p == 2) {
        Rational q(BigInt(1), BigInt(3));
        sup = {
            {"a", AffineElement(cnst(1), cnst(1)), q},  // lamp, self-inverse
            {"t", AffineElement(cnst(0), mono(1, 1)), q},
            {"t^-1", AffineElement(cnst(0), mono(1, -1)), q},
        };
    } else {
        Rational q(BigInt(1), BigInt(4));
        sup = {
            {"a", AffineElement(cnst(1), cnst(1)), q},
            {"a^-1", AffineElement(cnst(-1), cnst(1)), q},
            {"t", AffineElement(cnst(0), mono(1, 1)), q},
            {"t^-1", AffineElement(cnst(0), mono(1, -1)), q},
        };
    }
    MeasuredGroup g("lamplighter:" + std::to_string(p), place, std::move(sup));
    g.set_x_index(p == 2 ? 1 : 2);  // t = (0, x), |x| = p > 1
    g.set_z_index(0);               // lamp = (1, 1)
    return g;
}

static MeasuredGroup make_zline() {
    Place place = Place::archimedean();
    auto rat = [&](int64_t n) { return ValuedScalar(place, Rational(n)); };
    Rational q(BigInt(1), BigInt(2));
    std::vector<MeasuredGroup::Entry> sup = {
        {"s", AffineElement(rat(1), rat(1)), q},
        {"s^-1", AffineElement(rat(-1), rat(1)), q},
    };
    MeasuredGroup g("zline", place, std::move(sup));
    g.set_z_index(0);
    return g;
}

MeasuredGroup builtin_group(const std::string& spec) {
    if (spec == "bs12") return make_bs12();
    if (spec == "zline") return make_zline();
    const std::string ll = "lamplighter:";
    if (spec.rfind(ll, 0) == 0) {
        uint32_t p = 0;
        try {
            p = static_cast<uint32_t>(std::stoul(spec.substr(ll.size())));
        } catch (const std::exception&) {
            throw InvalidGroupSpecError("bad lamplighter spec \"" + spec + "\"");
        }
        if (!is_prime_u32(p)) throw NonPrimeError(std::to_string(p) + " is not prime");
        return make_lamplighter(p);
    }
    throw InvalidGroupSpecError("unknown group \"" + spec + "\"");
}

}  // namespace affharm
