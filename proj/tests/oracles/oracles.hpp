#pragma once

// Reference implementations used only by tests. None of them call the
// library code they are checked against.

#include "argmerge/aggregation.hpp"
#include "argmerge/combinator.hpp"
#include "argmerge/harness.hpp"
#include "argmerge/retrieval.hpp"
#include "argmerge/tree_qbaf.hpp"

#include <functional>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

using argmerge::ArgumentId;
using argmerge::Qbaf;
using argmerge::Relation;
using argmerge::TreeQbaf;

// --- paths -----------------------------------------------------------------

/// Simple paths from -> to, each as the list of visited argument ids, found
/// by breadth-first expansion of partial paths.
std::set<std::vector<std::string>> all_paths(const Qbaf& q, const std::string& from, const std::string& to);

// --- DF-QuAD ---------------------------------------------------------------

/// Direct recursion on the definitions of F and C, reading edges from the
/// raw link list.
double naive_strength(const Qbaf& q, const std::string& id);

/// Stance from the attack count on the root path found by all_paths.
std::map<std::string, argmerge::Stance> parity_stances(const TreeQbaf& q);

// --- combination -----------------------------------------------------------

using MemberKey = std::pair<std::size_t, std::string>;
using MemberSet = std::set<MemberKey>;

/// A combined framework with cluster ids erased.
struct Canonical {
    std::set<MemberSet> clusters;
    std::map<MemberSet, double> base_scores;
    std::set<std::tuple<MemberSet, MemberSet, Relation>> edges;
    MemberSet claim;
};

/// Same clusters, edges and claim; base scores within `tolerance`.
bool equivalent(const Canonical& a, const Canonical& b, double tolerance = 1e-12);

Canonical canonicalize(const argmerge::CombinedQbaf& c);
std::string describe(const Canonical& c);

/// Pairwise similarity keyed by "source:id"; unlisted pairs score `fallback`.
struct PsiTable {
    std::map<std::pair<std::string, std::string>, double> scores;
    double fallback = 0.0;

    double operator()(const MemberKey& x, const MemberKey& y) const;
    void set(const MemberKey& x, const MemberKey& y, double s);
    /// False when some x~y and y~z reach delta while x~z does not.
    bool transitive_at(double delta) const;
};

struct NonDeterminism : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Merging by fixpoint: start from singletons with all claims joined, then
/// merge any two arguments whose parents share a cluster, that bear the same
/// relation to them, and whose similarity reaches delta, until nothing
/// changes. Repeated under several enumeration orders; throws NonDeterminism
/// when the results differ.
Canonical brute_force_combine(const std::vector<TreeQbaf>& inputs, const PsiTable& psi, double delta,
                              const std::function<double(const std::vector<double>&)>& omega,
                              unsigned orders = 6, std::uint64_t seed = 1);

/// Plain arithmetic mean and maximum.
double mean(const std::vector<double>& v);
double maximum(const std::vector<double>& v);

/// Connected components of the graph whose edges are the pairs with
/// psi >= delta.
std::set<MemberSet> components(const std::vector<MemberKey>& nodes, const PsiTable& psi, double delta);

// --- retrieval -------------------------------------------------------------

struct Hit {
    std::string doc_id;
    double score;
};

/// Score every document, sort all of them, keep the first k eligible ones.
std::vector<Hit> exhaustive_retrieve(const argmerge::RetrievalIndex& index,
                                     const std::vector<argmerge::EmbeddingVector>& queries,
                                     argmerge::Date cutoff, std::size_t k);

// --- generators ------------------------------------------------------------

struct TreeShape {
    std::size_t size = 8;
    /// Ids are prefix + number; the claim is prefix + "0".
    std::string prefix = "n";
    double attack_probability = 0.5;
    /// Base scores are multiples of 1/grid when grid > 0, otherwise continuous.
    unsigned grid = 0;
};

TreeQbaf random_tree(std::mt19937_64& rng, const TreeShape& shape);

/// Random words from a small vocabulary.
std::string random_text(std::mt19937_64& rng, std::size_t words);

/// Random scores for every pair of arguments across `inputs`; a fraction
/// `merge_rate` of them are at or above delta.
PsiTable random_psi(std::mt19937_64& rng, const std::vector<TreeQbaf>& inputs, double delta, double merge_rate);

/// Transitive by construction: each argument draws one of `labels` topics;
/// same topic scores above delta, different topics below.
PsiTable random_topic_psi(std::mt19937_64& rng, const std::vector<TreeQbaf>& inputs, double delta,
                          unsigned labels);

/// The table as a scorer keyed by "source:id".
std::shared_ptr<argmerge::TableScorer> to_scorer(const PsiTable& psi);

std::vector<argmerge::CorpusDocument> random_corpus(std::mt19937_64& rng, std::size_t n);

// --- experiment fixtures ---------------------------------------------------

/// Two agents over `claims` claims with alternating gold labels. Agent A is
/// right on the first half and B on the second; each right answer comes with
/// two arguments of the right polarity and each wrong one with a single
/// argument of the wrong polarity, so the combined framework is right
/// everywhere. Fixed-mode runs use base score 0.5 throughout.
argmerge::ExperimentSpec complementary_agents(std::size_t claims);

/// `agents` agents sharing one set of random frameworks. Argument texts are
/// unique within a framework and delta is 0.99, so only copies merge.
argmerge::ExperimentSpec identical_agents(std::mt19937_64& rng, std::size_t claims, std::size_t agents);

} // namespace oracle
