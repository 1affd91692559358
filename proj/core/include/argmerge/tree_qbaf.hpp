#pragma once

// QBAFs for a claim: the attack/support graph is a tree rooted at the claim,
// with every edge pointing from child to parent.

#include "argmerge/errors.hpp"
#include "argmerge/qbaf.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace argmerge {

/// One failed condition of the "QBAF for a claim" definition:
///   1 - the claim has an outgoing path,
///   2 - a non-claim argument does not have exactly one path to the claim,
///   3 - an argument has a path to itself.
struct TreeViolation {
    int condition;
    std::vector<ArgumentId> arguments;
    std::string message;
};

struct TreeReport {
    std::vector<TreeViolation> violations;

    bool ok() const noexcept { return violations.empty(); }
    bool violates(int condition) const noexcept;
    std::string summary() const;
};

/// Throws UnknownArgument if the claim is absent.
TreeReport validate_tree(const Qbaf& q, const ArgumentId& claim);

class InvalidTree : public Error {
public:
    explicit InvalidTree(TreeReport report)
        : Error("not a tree for its claim: " + report.summary()), report_(std::move(report)) {}
    const TreeReport& report() const noexcept { return report_; }

private:
    TreeReport report_;
};

enum class Stance { Pro, Con };

std::string_view to_string(Stance s) noexcept;

/// A validated QBAF for a designated claim, with precomputed tree structure.
class TreeQbaf {
public:
    /// Throws InvalidTree (or UnknownArgument for a missing claim).
    static TreeQbaf make(Qbaf q, const ArgumentId& claim);

    const Qbaf& qbaf() const noexcept { return qbaf_; }
    std::size_t size() const noexcept { return qbaf_.size(); }
    std::size_t claim_index() const noexcept { return claim_; }
    const ArgumentId& claim() const { return qbaf_.arguments()[claim_].id; }

    std::optional<std::size_t> parent(std::size_t index) const;
    /// Relation of `index` toward its parent; undefined for the claim.
    Relation relation_to_parent(std::size_t index) const { return relation_.at(index); }
    std::size_t depth_of(std::size_t index) const { return depth_.at(index); }
    std::size_t max_depth() const noexcept { return max_depth_; }

    std::span<const std::size_t> attackers(std::size_t index) const { return attackers_.at(index); }
    std::span<const std::size_t> supporters(std::size_t index) const { return supporters_.at(index); }

    /// Arguments grouped by depth; layer 0 is the claim alone.
    const std::vector<std::vector<std::size_t>>& layers() const noexcept { return layers_; }

private:
    TreeQbaf() = default;

    Qbaf qbaf_;
    std::size_t claim_ = 0;
    std::vector<std::optional<std::size_t>> parent_;
    std::vector<Relation> relation_;
    std::vector<std::size_t> depth_;
    std::vector<std::vector<std::size_t>> attackers_;
    std::vector<std::vector<std::size_t>> supporters_;
    std::vector<std::vector<std::size_t>> layers_;
    std::size_t max_depth_ = 0;
};

struct Children {
    std::vector<ArgumentId> attackers;
    std::vector<ArgumentId> supporters;
};

/// Throws UnknownArgument.
Children children(const TreeQbaf& q, const ArgumentId& parent);

/// Stance of every argument by the parity of attacks on its root path.
/// The claim itself is Pro.
std::map<ArgumentId, Stance> classify_pro_con(const TreeQbaf& q);

/// Longest root path; 0 for a claim-only framework.
std::size_t depth(const TreeQbaf& q);

} // namespace argmerge
