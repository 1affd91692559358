#pragma once

// Merges n > 1 tree-shaped QBAFs for the same claim into one combined QBAF.
//
// Clusters are built layer by layer from the claim outward. At depth d,
// two arguments are candidates for merging when their parents already sit
// in the same cluster and both bear the same relation (attack or support)
// toward it; candidates with similarity >= threshold are merged, and merging
// is transitive. Cluster edges are lifted from member edges, and each
// cluster's base score aggregates its members' base scores.

#include "argmerge/aggregation.hpp"
#include "argmerge/similarity.hpp"
#include "argmerge/tree_qbaf.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace argmerge {

struct ProvenancedArgument {
    /// Which input framework (0-based).
    std::size_t source_index;
    ArgumentId id;
    std::string text;
    double base_score;

    ArgumentRef ref() const { return ArgumentRef{source_index, id.str(), text}; }
};

struct Cluster {
    ArgumentId id;
    /// Sorted by (source_index, id).
    std::vector<ProvenancedArgument> members;
    double aggregated_base_score;
    /// Text of the first member.
    std::string representative_text;
};

/// Indices into CombinedQbaf::clusters.
struct ClusterEdge {
    std::size_t from;
    std::size_t to;

    friend bool operator==(const ClusterEdge&, const ClusterEdge&) = default;
    friend auto operator<=>(const ClusterEdge&, const ClusterEdge&) = default;
};

struct CombineProvenance {
    std::size_t input_count = 0;
    double threshold = 0.5;
    std::string aggregator;
    std::string provider;
};

struct CombineStats {
    /// Candidate pairs whose similarity was compared against the threshold.
    std::size_t similarity_comparisons = 0;
    std::size_t layers = 0;
    std::size_t merges = 0;
};

struct CombinedQbaf {
    /// Claim cluster first, then by depth, then by first member.
    std::vector<Cluster> clusters;
    std::vector<ClusterEdge> attacks;
    std::vector<ClusterEdge> supports;
    std::size_t claim_cluster = 0;
    CombineProvenance provenance;
    CombineStats stats;

    const Cluster& claim() const { return clusters.at(claim_cluster); }
    /// Cluster holding (source, id), if any.
    std::optional<std::size_t> cluster_of(std::size_t source, const ArgumentId& id) const;

    /// The cluster-level framework. Throws InvalidFramework when the
    /// lifted relations overlap.
    Qbaf to_qbaf() const;
    /// Throws InvalidTree if the cluster graph is not a tree for the claim cluster.
    TreeQbaf to_tree() const;
};

struct CombineOptions {
    /// Require every input's claim to carry the same argument id. When false,
    /// the roots are identified with each other regardless of id.
    bool require_matching_claim_ids = true;
};

/// Throws InvalidFramework for fewer than two inputs, ClaimMismatch when
/// claim ids differ (unless disabled), and RelationConflict when a cluster
/// pair would be lifted as both an attack and a support.
CombinedQbaf combine(std::span<const TreeQbaf> inputs, Similarity& psi, const Aggregator& omega,
                     const CombineOptions& options = {});

/// Convenience overload building the similarity from a config.
CombinedQbaf combine(std::span<const TreeQbaf> inputs, const SimilarityConfig& config,
                     AggregatorKind aggregator, const CombineOptions& options = {});

// --- Independent validation -------------------------------------------------

enum class Severity { Failure, Warning };

struct CombinedFinding {
    /// partition | claim-cluster | lifting-sound | lifting-complete |
    /// base-score | qbaf | tree | stance | grouping | missed-merge |
    /// iff-deviation | provenance
    std::string check;
    Severity severity;
    std::string message;
};

struct CombinedReport {
    std::vector<CombinedFinding> findings;

    bool ok() const noexcept { return failures() == 0; }
    std::size_t failures() const noexcept;
    std::size_t warnings() const noexcept;
    bool has(std::string_view check, Severity severity = Severity::Failure) const;
    std::string summary() const;
};

inline constexpr double kBaseScoreTolerance = 1e-12;

/// Re-derives every structural property of a combined framework from the
/// inputs, without sharing code with combine(). Each violation becomes a
/// finding with a witness. Members merged although their similarity is below
/// the threshold (possible when similarity is not transitive) are reported
/// as iff-deviation warnings rather than failures.
CombinedReport validate_combined(std::span<const TreeQbaf> inputs, const CombinedQbaf& output,
                                 Similarity& psi, const Aggregator& omega,
                                 double tolerance = kBaseScoreTolerance);

} // namespace argmerge
