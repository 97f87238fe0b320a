#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "affharm/exact_fields.hpp"

namespace affharm {

struct VirtuallyAbelianError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MalformedWordError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct InvalidGroupSpecError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct NonPrimeError : InvalidGroupSpecError {
    using InvalidGroupSpecError::InvalidGroupSpecError;
};
struct BallBudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The map t -> lambda*t + c, stored as the pair (c, lambda) in normal form.
// Composition: (c1,l1)*(c2,l2) = (c1 + l1*c2, l1*l2).
class AffineElement {
public:
    AffineElement() = default;
    AffineElement(ValuedScalar c, ValuedScalar lambda);
    static AffineElement identity(const Place& place);

    const ValuedScalar& c() const { return c_; }
    const ValuedScalar& lambda() const { return lambda_; }
    const Place& place() const { return c_.place(); }
    bool is_identity() const { return c_.is_zero() && lambda_.is_one(); }

    AffineElement operator*(const AffineElement& o) const;
    AffineElement inverse() const;  // (-lambda^{-1} c, lambda^{-1})

    bool operator==(const AffineElement& o) const { return c_ == o.c_ && lambda_ == o.lambda_; }
    bool operator!=(const AffineElement& o) const { return !(*this == o); }

    std::string to_string() const;  // "(c; lambda)"
    static AffineElement parse(const Place& place, const std::string& s);
    size_t hash() const;

private:
    ValuedScalar c_, lambda_;
};

// rho(x) = -log|lambda(x)|, the additive homomorphism driving the projected
// 1-D walk.
LogAbs rho(const AffineElement& x);

struct AffineElementHash {
    size_t operator()(const AffineElement& x) const { return x.hash(); }
};

// One token of a word: generator label with an integer exponent.
struct WordToken {
    std::string label;
    int64_t exponent = 1;
};
using Word = std::vector<WordToken>;

// grammar: whitespace-separated "label^exp" tokens, exponent optional
Word parse_word(const std::string& text);

// When every generator has lambda equal to a plain power of a fixed prime
// base and c a constant unit, walks can run on integer exponent counters
// instead of exact field elements. Detected at group construction.
struct PowerBasis {
    uint32_t base = 0;
    // per support entry: lambda = base^lambda_exp
    std::vector<int32_t> lambda_exp;
    // per support entry: c = c_unit (as an integer constant, 0 when absent);
    // for laurent places this is a residue mod p
    std::vector<int32_t> c_unit;
};

// Finite symmetric generating set with rational mu-weights plus the walk
// services built on it.
class MeasuredGroup {
public:
    struct Entry {
        std::string label;      // display label, e.g. "a" or "a^-1"
        AffineElement element;
        Rational weight;
    };

    MeasuredGroup(std::string name, Place place, std::vector<Entry> support);

    const std::string& name() const { return name_; }
    const Place& place() const { return place_; }
    const std::vector<Entry>& support() const { return support_; }
    size_t inverse_of(size_t i) const { return inverse_of_[i]; }
    bool virtually_abelian() const { return virtually_abelian_; }

    // index of the distinguished x-element (form (0,lambda), |lambda|>1)
    std::optional<size_t> x_index() const { return x_index_; }
    void set_x_index(size_t i) { x_index_ = i; }
    // index of the designated z-element ((c,1), c != 0, mu(z) > 0)
    std::optional<size_t> z_index() const { return z_index_; }
    void set_z_index(size_t i) { z_index_ = i; }

    const std::optional<PowerBasis>& power_basis() const { return power_basis_; }

    AffineElement evaluate(const Word& w) const;
    AffineElement evaluate(const std::string& word_text) const;

    size_t find_entry(const std::string& label) const;  // npos when missing

private:
    void check_invariants() const;
    void detect_power_basis();

    std::string name_;
    Place place_;
    std::vector<Entry> support_;
    std::vector<size_t> inverse_of_;
    bool virtually_abelian_ = false;
    std::optional<size_t> x_index_, z_index_;
    std::optional<PowerBasis> power_basis_;
};

// Memoized Cayley-graph ball: element -> word-metric distance from 1.
// Construction is breadth-first on exact normal forms with a node budget;
// afterwards the table is read-only and shareable.
class BallIndex {
public:
    BallIndex(const MeasuredGroup& g, int radius, size_t node_budget = 5'000'000);

    int radius() const { return radius_; }
    size_t size() const { return dist_.size(); }
    // distance from the identity, nullopt when |x| > radius
    std::optional<int> distance(const AffineElement& x) const;
    const std::vector<AffineElement>& elements() const { return elements_; }
    std::vector<AffineElement> sphere(int r) const;

private:
    int radius_;
    std::unordered_map<AffineElement, int, AffineElementHash> dist_;
    std::vector<AffineElement> elements_;  // BFS order
};

// |x|_S via BFS out to radius_cap; nullopt when the element lies outside.
std::optional<int> word_length(const MeasuredGroup& g, const AffineElement& x, int radius_cap,
                               size_t node_budget = 5'000'000);

// Conjugates the presentation so a distinguished element takes the form
// (0, lambda) with |lambda| > 1. Groups whose generators all have |lambda|=1
// are flagged virtually abelian and rejected ( |.| is multiplicative, so
// searching longer words cannot help).
MeasuredGroup normalize_presentation(const MeasuredGroup& g);

// "bs12" | "lamplighter:p" | "zline"
MeasuredGroup builtin_group(const std::string& spec);

}  // namespace affharm
