#include <doctest.h>

#include <cmath>
#include <cstring>

#include "affharm/affine.hpp"
#include "affharm/rng.hpp"

using namespace affharm;

namespace {

AffineElement arch_el(int64_t cn, int64_t cd, int64_t ln, int64_t ld) {
    Place p = Place::archimedean();
    return AffineElement(ValuedScalar(p, Rational(BigInt(cn), BigInt(cd))),
                         ValuedScalar(p, Rational(BigInt(ln), BigInt(ld))));
}

AffineElement random_element(const MeasuredGroup& g, SplitMix64& rng, int len) {
    AffineElement x = AffineElement::identity(g.place());
    for (int i = 0; i < len; ++i)
        x = x * g.support()[rng.next_below(static_cast<uint32_t>(g.support().size()))].element;
    return x;
}

}  // namespace

TEST_SUITE("affine_groups") {

TEST_CASE("composition law and inverses") {
    AffineElement id = AffineElement::identity(Place::archimedean());
    AffineElement x = arch_el(5, 1, 2, 1);
    CHECK(id * x == x);
    CHECK(x * id == x);
    CHECK(arch_el(0, 1, 2, 1) * arch_el(1, 1, 1, 1) == arch_el(2, 1, 2, 1));
    // inverse formula (-lambda^{-1} c, lambda^{-1})
    CHECK(arch_el(1, 1, 2, 1) * arch_el(-1, 2, 1, 2) == id);
    CHECK(arch_el(1, 1, 2, 1).inverse() == arch_el(-1, 2, 1, 2));
}

TEST_CASE("group axioms on random triples") {
    for (const char* spec : {"bs12", "lamplighter:2", "lamplighter:3", "zline"}) {
        MeasuredGroup g = builtin_group(spec);
        SplitMix64 rng(fnv1a64(spec, strlen(spec)));
        for (int i = 0; i < 60; ++i) {
            AffineElement a = random_element(g, rng, 5);
            AffineElement b = random_element(g, rng, 5);
            AffineElement c = random_element(g, rng, 5);
            CHECK((a * b) * c == a * (b * c));
            CHECK(a * a.inverse() == AffineElement::identity(g.place()));
            CHECK(a.inverse() * a == AffineElement::identity(g.place()));
        }
    }
}

TEST_CASE("rho values and homomorphism") {
    MeasuredGroup bs = builtin_group("bs12");
    CHECK(rho(AffineElement::identity(bs.place())).is_zero());
    LogAbs ra = rho(bs.support()[0].element);  // a = (0,2)
    CHECK(ra.is_exact());
    CHECK(ra.k == -1);
    CHECK(ra.base == 2);
    CHECK(ra.to_double() == doctest::Approx(-std::log(2.0)));

    MeasuredGroup lp = builtin_group("lamplighter:2");
    LogAbs rt = rho(lp.support()[1].element);  // t = (0, x), |x| = 2
    CHECK(rt.is_exact());
    CHECK(rt.k == -1);

    SplitMix64 rng(5);
    for (int i = 0; i < 100; ++i) {
        AffineElement a = random_element(bs, rng, 6);
        AffineElement b = random_element(bs, rng, 6);
        LogAbs sum = rho(a) + rho(b);
        CHECK(rho(a * b) == sum);
    }
}

TEST_CASE("word parsing and evaluation") {
    MeasuredGroup bs = builtin_group("bs12");
    CHECK(bs.evaluate("a^-3 b^2") == arch_el(1, 4, 1, 8));
    CHECK(bs.evaluate("a b a^-1") == arch_el(2, 1, 1, 1));
    CHECK(bs.evaluate("") == AffineElement::identity(bs.place()));
    CHECK_THROWS_AS(bs.evaluate("a^x"), MalformedWordError);
    CHECK_THROWS_AS(bs.evaluate("q"), MalformedWordError);
    CHECK(AffineElement::parse(bs.place(), "(1/4; 1/8)") == arch_el(1, 4, 1, 8));
}

TEST_CASE("word length via BFS with independent enumeration oracle") {
    MeasuredGroup lp = builtin_group("lamplighter:2");
    // lamps at exponents 0 and 1, head back at 0: c = 1 + x, lambda = 1
    AffineElement target = lp.evaluate("a t a t^-1");
    CHECK(target.c().fp_ratio().to_string() == "1 + x^1");
    CHECK(target.lambda().is_one());

    // oracle: exhaust every word of length <= 3 over the 3 generators
    int shortest = -1;
    size_t ng = lp.support().size();
    for (int len = 1; len <= 4 && shortest < 0; ++len) {
        size_t total = 1;
        for (int i = 0; i < len; ++i) total *= ng;
        for (size_t code = 0; code < total && shortest < 0; ++code) {
            size_t c = code;
            AffineElement x = AffineElement::identity(lp.place());
            for (int i = 0; i < len; ++i) {
                x = x * lp.support()[c % ng].element;
                c /= ng;
            }
            if (x == target) shortest = len;
        }
    }
    CHECK(shortest == 4);
    CHECK(word_length(lp, target, 5) == 4);
    CHECK(word_length(lp, AffineElement::identity(lp.place()), 3) == 0);
    for (const auto& e : lp.support()) CHECK(word_length(lp, e.element, 3) == 1);
    // outside the cap
    CHECK(!word_length(lp, lp.evaluate("t^9"), 4).has_value());
}

TEST_CASE("word metric is left invariant and symmetric on the ball") {
    MeasuredGroup bs = builtin_group("bs12");
    BallIndex ball(bs, 8);
    SplitMix64 rng(17);
    const auto& elems = ball.elements();
    for (int i = 0; i < 150; ++i) {
        const AffineElement& x = elems[rng.next_below(static_cast<uint32_t>(elems.size()))];
        const AffineElement& y = elems[rng.next_below(static_cast<uint32_t>(elems.size()))];
        auto dxy = ball.distance(x.inverse() * y);
        auto dyx = ball.distance(y.inverse() * x);
        if (!dxy || !dyx) continue;
        CHECK(*dxy == *dyx);  // |x^{-1} y| = |y^{-1} x|
        // left invariance: translating both points by a generator fixes it
        const AffineElement& s = bs.support()[rng.next_below(4)].element;
        CHECK((s * x).inverse() * (s * y) == x.inverse() * y);
    }
}

TEST_CASE("rho and c are exponentially bounded in word length") {
    MeasuredGroup bs = builtin_group("bs12");
    BallIndex ball(bs, 7);
    double max_rho_ratio = 0, max_logc_ratio = 0;
    for (const AffineElement& x : ball.elements()) {
        int d = *ball.distance(x);
        if (d == 0) continue;
        max_rho_ratio = std::max(max_rho_ratio, std::fabs(rho(x).to_double()) / d);
        double c = std::fabs(x.c().rational().to_double());
        max_logc_ratio = std::max(max_logc_ratio, std::log1p(c) / d);
    }
    // the empirical K of |rho(x)| <= K|x|: exactly log 2 for this
    // presentation (only a-steps move rho)
    CHECK(max_rho_ratio == doctest::Approx(std::log(2.0)));
    CHECK(max_logc_ratio < 1.0);
    MESSAGE("empirical K: rho ", max_rho_ratio, ", log(1+|c|) ", max_logc_ratio);
}

TEST_CASE("normalize_presentation") {
    // already normalized: unchanged
    MeasuredGroup bs = builtin_group("bs12");
    MeasuredGroup norm = normalize_presentation(bs);
    CHECK(norm.x_index().has_value());
    CHECK(norm.support()[*norm.x_index()].element == arch_el(0, 1, 2, 1));
    for (size_t i = 0; i < bs.support().size(); ++i)
        CHECK(norm.support()[i].element == bs.support()[i].element);

    // generator (1,2): conjugation by ((1-2)^{-1}, 1) = (-1,1) gives (0,2)
    Place p = Place::archimedean();
    Rational q(BigInt(1), BigInt(4));
    std::vector<MeasuredGroup::Entry> sup = {
        {"g", arch_el(1, 1, 2, 1), q},
        {"g^-1", arch_el(-1, 2, 1, 2), q},
        {"b", arch_el(1, 1, 1, 1), q},
        {"b^-1", arch_el(-1, 1, 1, 1), q},
    };
    MeasuredGroup shifted("shifted", p, sup);
    MeasuredGroup fixed = normalize_presentation(shifted);
    CHECK(fixed.support()[*fixed.x_index()].element == arch_el(0, 1, 2, 1));
    // weights preserved
    for (const auto& e : fixed.support()) CHECK(e.weight == q);
    // conjugation preserves word lengths: ball sizes agree by radius
    BallIndex b1(shifted, 5), b2(fixed, 5);
    CHECK(b1.size() == b2.size());

    // all |lambda| = 1: rejected as virtually abelian
    CHECK(builtin_group("zline").virtually_abelian());
    CHECK_THROWS_AS(normalize_presentation(builtin_group("zline")), VirtuallyAbelianError);
}

TEST_CASE("builtin groups") {
    MeasuredGroup bs = builtin_group("bs12");
    // z-element b = (1,1): c != 0, lambda = 1, mu(z) > 0
    const auto& z = bs.support()[*bs.z_index()];
    CHECK(z.element.lambda().is_one());
    CHECK(!z.element.c().is_zero());
    CHECK(z.weight.sign() > 0);
    // x-element a = (0,2) has |lambda| = 2 > 1
    const auto& x = bs.support()[*bs.x_index()];
    CHECK(x.element.c().is_zero());
    CHECK(abs_value(x.element.lambda()).to_double() > 0);

    // lamplighter:2: the lamp is its own inverse; support has 3 elements
    MeasuredGroup lp = builtin_group("lamplighter:2");
    CHECK(lp.support().size() == 3);
    CHECK(lp.inverse_of(0) == 0);
    for (size_t i = 0; i < lp.support().size(); ++i)
        CHECK(lp.support()[lp.inverse_of(i)].weight == lp.support()[i].weight);

    MeasuredGroup lp3 = builtin_group("lamplighter:3");
    CHECK(lp3.support().size() == 4);

    CHECK_THROWS_AS(builtin_group("lamplighter:4"), NonPrimeError);
    CHECK_THROWS_AS(builtin_group("unknown"), InvalidGroupSpecError);

    // mu is a probability measure closed under inverses on every builtin
    for (const char* spec : {"bs12", "lamplighter:2", "zline"}) {
        MeasuredGroup g = builtin_group(spec);
        Rational total;
        for (const auto& e : g.support()) total = total + e.weight;
        CHECK(total.is_one());
    }
}

TEST_CASE("ball budget is enforced") {
    MeasuredGroup bs = builtin_group("bs12");
    CHECK_THROWS_AS(BallIndex(bs, 10, 100), BallBudgetError);
}

}  // TEST_SUITE
