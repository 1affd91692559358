#pragma once

// DF-QuAD gradual semantics over tree-shaped QBAFs.

#include "argmerge/tree_qbaf.hpp"

#include <span>
#include <vector>

namespace argmerge {

/// F: 0 for no values, otherwise 1 - prod(|1 - w_i|). Throws DomainError.
double f_aggregate(std::span<const double> values);

/// C: moves v0 toward 0 when attack dominates, toward 1 when support
/// dominates, by the fraction |vs - va|. Throws DomainError.
double c_combine(double v0, double va, double vs);

/// Final strength of every argument of one evaluated framework.
class StrengthMap {
public:
    StrengthMap(const TreeQbaf& q, std::vector<double> strengths);

    double operator[](std::size_t index) const { return strengths_.at(index); }
    /// Throws UnknownArgument.
    double at(const ArgumentId& id) const;
    std::span<const double> values() const noexcept { return strengths_; }
    std::span<const Argument> arguments() const noexcept { return arguments_; }
    std::size_t size() const noexcept { return strengths_.size(); }

private:
    std::vector<Argument> arguments_;
    std::vector<double> strengths_;
};

/// Bottom-up, layer by layer; no recursion.
StrengthMap evaluate_strengths(const TreeQbaf& q);

inline constexpr double kDefaultDecisionThreshold = 0.5;

struct Verdict {
    enum class Outcome { Accepted, Rejected };

    Outcome outcome;
    double strength;

    bool accepted() const noexcept { return outcome == Outcome::Accepted; }
};

/// Accepted iff the claim's strength is at least the threshold.
Verdict verdict(const StrengthMap& strengths, const ArgumentId& claim,
                double threshold = kDefaultDecisionThreshold);

} // namespace argmerge
