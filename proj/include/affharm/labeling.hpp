#pragma once

#include <string>

#include "affharm/affine.hpp"

namespace affharm {

// Right-coset labeling for a finite-index subgroup H < G, as a permutation
// representation of the generators on H\G with label(H) = 0. Two families
// cover every subgroup used here: H = lambda^{-1}(base^{mZ}) ("mod:m",
// mirroring the lambda-exponent subgroups), and the even translations of
// zline ("parity").
class CosetLabeling {
public:
    enum class Kind { LambdaExpMod, CParity };

    static CosetLabeling lambda_exp_mod(const MeasuredGroup& g, int m);
    static CosetLabeling zline_parity(const MeasuredGroup& g);
    // "mod:m" | "parity"
    static CosetLabeling parse(const MeasuredGroup& g, const std::string& spec);

    Kind kind() const { return kind_; }
    int index() const { return modulus_; }
    std::string spec() const;

    int label(const AffineElement& x) const;
    // right action on labels: label(x*s) given label(x)
    int act(int lbl, size_t gen) const { return action_[static_cast<size_t>(lbl)][gen]; }
    // the induced chain on labels reaches every coset (checked at build)
    bool irreducible() const { return irreducible_; }

private:
    CosetLabeling(const MeasuredGroup& g, Kind kind, int m);
    Kind kind_;
    int modulus_;
    uint32_t base_ = 0;  // lambda-exponent base for LambdaExpMod
    std::vector<std::vector<int>> action_;
    std::vector<int> gen_shift_;  // label shift contributed by each generator
    bool irreducible_ = false;
};

}  // namespace affharm
