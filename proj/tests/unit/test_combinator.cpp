#include "argmerge/combinator.hpp"
#include "argmerge/dfquad.hpp"
#include "argmerge/errors.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace argmerge;

namespace {

struct Spec {
    std::string id;
    double score;
    std::string parent;
    Relation relation = Relation::Support;
    std::string text;
};

// First entry is the claim.
TreeQbaf tree(const std::vector<Spec>& nodes) {
    QbafBuilder b;
    for (const auto& n : nodes) {
        b.add_argument(ArgumentId(n.id), n.text.empty() ? n.id : n.text, n.score);
    }
    for (const auto& n : nodes) {
        if (!n.parent.empty()) {
            b.add_edge(ArgumentId(n.id), ArgumentId(n.parent), n.relation);
        }
    }
    return TreeQbaf::make(b.build(), ArgumentId(nodes.front().id));
}

oracle::MemberSet members(std::initializer_list<oracle::MemberKey> keys) {
    return oracle::MemberSet(keys);
}

oracle::PsiTable senate_table() {
    oracle::PsiTable t;
    t.set({0, "b"}, {1, "b'"}, 0.9);
    t.set({1, "e"}, {1, "e'"}, 0.6);
    return t;
}

CombinedQbaf combine_senate(const Aggregator& omega, CombinedReport* report = nullptr) {
    const auto inputs = fixtures::senate();
    Similarity psi(fixtures::senate_psi(), 0.5);
    auto out = combine(inputs, psi, omega);
    if (report) {
        *report = validate_combined(inputs, out, psi, omega);
    }
    return out;
}

TreeQbaf shuffled_copy(const TreeQbaf& t, std::mt19937_64& rng) {
    const auto all_args = t.qbaf().arguments();
    std::vector<Argument> args(all_args.begin(), all_args.end());
    std::shuffle(args.begin(), args.end(), rng);
    const auto all_edges = t.qbaf().baf().edges();
    std::vector<Edge> edges(all_edges.begin(), all_edges.end());
    std::shuffle(edges.begin(), edges.end(), rng);
    QbafBuilder b;
    for (const auto& a : args) {
        b.add_argument(a.id, a.text, t.qbaf().base_score(a.id));
    }
    for (const auto& e : edges) {
        b.add_edge(e.from, e.to, e.kind);
    }
    return TreeQbaf::make(b.build(), t.claim());
}

std::size_t find_cluster(const CombinedQbaf& c, std::size_t source, const std::string& id) {
    const auto k = c.cluster_of(source, ArgumentId(id));
    EXPECT_TRUE(k.has_value()) << source << ":" << id;
    return k.value_or(0);
}

} // namespace

TEST(Combine, SenateMatchesHandResult) {
    CombinedReport report;
    const auto out = combine_senate(Aggregator(AggregatorKind::Average), &report);
    EXPECT_TRUE(report.ok()) << report.summary();
    EXPECT_EQ(report.warnings(), 0u);

    oracle::Canonical want;
    const auto x1 = members({{0, "a"}, {1, "a"}});
    const auto x2 = members({{0, "b"}, {1, "b'"}});
    const auto x3 = members({{0, "c"}});
    const auto x4 = members({{1, "d"}});
    const auto x5 = members({{1, "e"}, {1, "e'"}});
    want.clusters = {x1, x2, x3, x4, x5};
    want.claim = x1;
    want.base_scores = {{x1, 0.5}, {x2, 0.45}, {x3, 0.8}, {x4, 0.4}, {x5, 0.2}};
    want.edges = {{x2, x1, Relation::Attack},
                  {x3, x1, Relation::Support},
                  {x4, x1, Relation::Support},
                  {x5, x2, Relation::Support}};
    const auto got = oracle::canonicalize(out);
    EXPECT_TRUE(oracle::equivalent(got, want)) << oracle::describe(got);

    ASSERT_EQ(out.clusters.size(), 5u);
    EXPECT_EQ(out.claim().id, ArgumentId("x1"));
    EXPECT_EQ(out.clusters[find_cluster(out, 0, "b")].id, ArgumentId("x2"));
    EXPECT_EQ(out.clusters[find_cluster(out, 0, "c")].id, ArgumentId("x3"));
    EXPECT_EQ(out.clusters[find_cluster(out, 1, "d")].id, ArgumentId("x4"));
    EXPECT_EQ(out.clusters[find_cluster(out, 1, "e'")].id, ArgumentId("x5"));

    // One candidate pair per (parent cluster, relation) group.
    EXPECT_EQ(out.stats.similarity_comparisons, 3u);
    EXPECT_EQ(out.stats.merges, 2u);
    EXPECT_EQ(out.provenance.input_count, 2u);
    EXPECT_EQ(out.provenance.aggregator, "avg");
    EXPECT_EQ(out.provenance.provider, "table:senate.psi.json");
}

TEST(Combine, SenateMatchesFixpointOracle) {
    const auto inputs = fixtures::senate();
    const auto want = oracle::brute_force_combine(inputs, senate_table(), 0.5, oracle::mean);
    const auto got = oracle::canonicalize(combine_senate(Aggregator(AggregatorKind::Average)));
    EXPECT_TRUE(oracle::equivalent(got, want)) << oracle::describe(got) << "\nvs\n" << oracle::describe(want);
}

TEST(Combine, SenateWithMaximum) {
    const auto out = combine_senate(Aggregator(AggregatorKind::Maximum));
    EXPECT_EQ(out.clusters[find_cluster(out, 0, "b")].aggregated_base_score, 0.7);
    EXPECT_EQ(out.clusters[find_cluster(out, 1, "e")].aggregated_base_score, 0.3);
}

TEST(Combine, CombinedTreeEvaluates) {
    const auto out = combine_senate(Aggregator(AggregatorKind::Average));
    const TreeQbaf t = out.to_tree();
    const auto s = evaluate_strengths(t);
    // x2 = 0.45 supported by x5 = 0.2; claim attacked by x2, supported by x3 and x4.
    const double x2 = 0.45 + 0.55 * 0.2;
    const double support = 1.0 - 0.2 * 0.6;
    EXPECT_NEAR(s.at("x2"), x2, 1e-12);
    EXPECT_NEAR(s.at("x1"), 0.5 + 0.5 * (support - x2), 1e-12);
}

TEST(Combine, IdenticalCopiesKeepTheFramework) {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const auto t = oracle::random_tree(rng, {.size = 2 + static_cast<std::size_t>(trial % 15)});
        const std::vector<TreeQbaf> inputs(2 + trial % 2, t);
        SimilarityConfig cfg;
        cfg.threshold = 0.99;
        auto psi = make_similarity(cfg);
        const Aggregator avg(AggregatorKind::Average);
        const auto out = combine(inputs, *psi, avg);
        EXPECT_TRUE(validate_combined(inputs, out, *psi, avg).ok());
        // Siblings can share a text, so compare strengths rather than shape.
        const auto want = evaluate_strengths(t).at(t.claim());
        const auto got = evaluate_strengths(out.to_tree()).at(out.claim().id);
        if (out.clusters.size() == t.size()) {
            EXPECT_NEAR(got, want, 1e-12);
            for (const auto& c : out.clusters) {
                EXPECT_EQ(c.members.size(), inputs.size());
            }
        }
    }
}

TEST(Combine, IdenticalCopiesWithDistinctTextsKeepEveryArgument) {
    const auto t = tree({{"a", 0.5, ""},
                         {"b", 0.2, "a", Relation::Attack, "markets will crash"},
                         {"c", 0.8, "a", Relation::Support, "rates are low"},
                         {"d", 0.6, "b", Relation::Attack, "earnings are strong"}});
    const std::vector<TreeQbaf> inputs{t, t, t};
    SimilarityConfig cfg;
    cfg.threshold = 0.99;
    auto psi = make_similarity(cfg);
    const auto out = combine(inputs, *psi, Aggregator(AggregatorKind::Average));
    ASSERT_EQ(out.clusters.size(), 4u);
    for (const auto& c : out.clusters) {
        EXPECT_EQ(c.members.size(), 3u);
    }
    EXPECT_NEAR(evaluate_strengths(out.to_tree()).at("x1"), evaluate_strengths(t).at("a"), 1e-12);
}

TEST(Combine, NothingSimilarGivesDisjointUnion) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<TreeQbaf> inputs;
        std::size_t total = 0;
        for (int i = 0; i < 2 + trial % 2; ++i) {
            inputs.push_back(oracle::random_tree(rng, {.size = 1 + static_cast<std::size_t>(rng() % 10)}));
            total += inputs.back().size();
        }
        Similarity psi(std::make_shared<TableScorer>(0.0), 0.5);
        const Aggregator avg(AggregatorKind::Average);
        const auto out = combine(inputs, psi, avg);
        EXPECT_EQ(out.clusters.size(), total - inputs.size() + 1);
        EXPECT_EQ(out.attacks.size() + out.supports.size(), total - inputs.size());
        EXPECT_TRUE(validate_combined(inputs, out, psi, avg).ok());
    }
}

TEST(Combine, NonTransitiveChainMergesWithWarning) {
    const auto q1 = tree({{"a", 0.5, ""}, {"p", 0.2, "a"}, {"q", 0.4, "a"}});
    const auto q2 = tree({{"a", 0.5, ""}, {"r", 0.9, "a"}});
    auto table = std::make_shared<TableScorer>(0.0);
    table->set("0:p", "1:r", 0.6).set("1:r", "0:q", 0.6).set("0:p", "0:q", 0.1);
    Similarity psi(table, 0.5);
    const std::vector<TreeQbaf> inputs{q1, q2};
    const Aggregator avg(AggregatorKind::Average);
    const auto out = combine(inputs, psi, avg);
    ASSERT_EQ(out.clusters.size(), 2u);
    EXPECT_EQ(out.clusters[1].members.size(), 3u);
    EXPECT_NEAR(out.clusters[1].aggregated_base_score, 0.5, 1e-12);
    const auto report = validate_combined(inputs, out, psi, avg);
    EXPECT_TRUE(report.ok()) << report.summary();
    EXPECT_TRUE(report.has("iff-deviation", Severity::Warning));
}

TEST(Combine, DifferentRelationsNeverMerge) {
    const auto q1 = tree({{"a", 0.5, ""}, {"x", 0.3, "a", Relation::Attack, "same text"}});
    const auto q2 = tree({{"a", 0.5, ""}, {"y", 0.3, "a", Relation::Support, "same text"}});
    const std::vector<TreeQbaf> inputs{q1, q2};
    SimilarityConfig cfg;
    auto psi = make_similarity(cfg);
    const auto out = combine(inputs, *psi, Aggregator(AggregatorKind::Average));
    EXPECT_EQ(out.clusters.size(), 3u);
    EXPECT_EQ(out.stats.similarity_comparisons, 0u);
}

TEST(Combine, ChildrenOfUnmergedParentsStaySeparate) {
    const auto q1 = tree({{"a", 0.5, ""}, {"b", 0.3, "a"}, {"k", 0.3, "b", Relation::Attack, "kid"}});
    const auto q2 = tree({{"a", 0.5, ""}, {"c", 0.3, "a"}, {"m", 0.3, "c", Relation::Attack, "kid"}});
    const std::vector<TreeQbaf> inputs{q1, q2};
    Similarity psi(std::make_shared<TableScorer>(0.0, "zero"), 0.5);
    const auto out = combine(inputs, psi, Aggregator(AggregatorKind::Average));
    EXPECT_EQ(out.clusters.size(), 5u);
}

TEST(Combine, ClaimIdentity) {
    const auto q1 = tree({{"a", 0.5, ""}, {"b", 0.3, "a"}});
    const auto q2 = tree({{"z", 0.7, ""}, {"c", 0.3, "z"}});
    const std::vector<TreeQbaf> inputs{q1, q2};
    Similarity psi(std::make_shared<TableScorer>(1.0), 0.5);
    const Aggregator avg(AggregatorKind::Average);
    EXPECT_THROW(combine(inputs, psi, avg), ClaimMismatch);
    const auto out = combine(inputs, psi, avg, {.require_matching_claim_ids = false});
    EXPECT_EQ(out.claim().members.size(), 2u);
    EXPECT_NEAR(out.claim().aggregated_base_score, 0.6, 1e-12);
    EXPECT_EQ(out.clusters.size(), 2u);
}

TEST(Combine, NeedsTwoInputs) {
    const auto inputs = fixtures::senate();
    Similarity psi(fixtures::senate_psi(), 0.5);
    const Aggregator avg(AggregatorKind::Average);
    EXPECT_THROW(combine(std::span(inputs).first(1), psi, avg), InvalidFramework);
    EXPECT_THROW(combine(std::span<const TreeQbaf>(), psi, avg), InvalidFramework);
}

TEST(Combine, InputOrderOfArgumentsDoesNotMatter) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<TreeQbaf> inputs;
        for (int i = 0; i < 2 + trial % 2; ++i) {
            inputs.push_back(oracle::random_tree(rng, {.size = 2 + static_cast<std::size_t>(rng() % 10)}));
        }
        const auto table = oracle::random_psi(rng, inputs, 0.5, 0.4);
        const Aggregator avg(AggregatorKind::Average);
        Similarity psi(oracle::to_scorer(table), 0.5);
        const auto base = combine(inputs, psi, avg);
        std::vector<TreeQbaf> shuffled;
        for (const auto& t : inputs) {
            shuffled.push_back(shuffled_copy(t, rng));
        }
        Similarity psi2(oracle::to_scorer(table), 0.5);
        const auto again = combine(shuffled, psi2, avg);
        EXPECT_TRUE(oracle::equivalent(oracle::canonicalize(base), oracle::canonicalize(again), 0.0));
        ASSERT_EQ(base.clusters.size(), again.clusters.size());
        for (std::size_t i = 0; i < base.clusters.size(); ++i) {
            EXPECT_EQ(base.clusters[i].id, again.clusters[i].id);
            EXPECT_EQ(base.clusters[i].aggregated_base_score, again.clusters[i].aggregated_base_score);
        }
    }
}

TEST(Combine, AgreesWithFixpointOracleOnRandomInputs) {
    std::mt19937_64 rng(2718);
    for (int trial = 0; trial < 150; ++trial) {
        std::vector<TreeQbaf> inputs;
        const int n = 2 + trial % 2;
        for (int i = 0; i < n; ++i) {
            inputs.push_back(oracle::random_tree(
                rng, {.size = 1 + static_cast<std::size_t>(rng() % 10), .attack_probability = 0.3}));
        }
        const double delta = 0.5;
        const auto table = trial % 2 ? oracle::random_psi(rng, inputs, delta, 0.5)
                                     : oracle::random_topic_psi(rng, inputs, delta, 2);
        const bool max_agg = trial % 3 == 0;
        const Aggregator omega(max_agg ? AggregatorKind::Maximum : AggregatorKind::Average);
        Similarity psi(oracle::to_scorer(table), delta);
        const auto out = combine(inputs, psi, omega);
        const auto want =
            oracle::brute_force_combine(inputs, table, delta, max_agg ? oracle::maximum : oracle::mean);
        const auto got = oracle::canonicalize(out);
        EXPECT_TRUE(oracle::equivalent(got, want, 1e-12))
            << "trial " << trial << "\n" << oracle::describe(got) << "\nvs\n" << oracle::describe(want);
        const auto report = validate_combined(inputs, out, psi, omega);
        EXPECT_TRUE(report.ok()) << report.summary();
        if (table.transitive_at(delta)) {
            EXPECT_EQ(report.warnings(), 0u) << report.summary();
        }
    }
}

TEST(Combine, SingleLayerClustersAreSimilarityComponents) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<TreeQbaf> inputs;
        std::vector<oracle::MemberKey> layer;
        for (std::size_t s = 0; s < 3; ++s) {
            std::vector<Spec> nodes{{"c", 0.5, ""}};
            const auto w = 1 + rng() % 5;
            for (std::size_t i = 0; i < w; ++i) {
                nodes.push_back({"s" + std::to_string(i), 0.5, "c"});
                layer.emplace_back(s, nodes.back().id);
            }
            inputs.push_back(tree(nodes));
        }
        const auto table = oracle::random_psi(rng, inputs, 0.5, 0.2);
        Similarity psi(oracle::to_scorer(table), 0.5);
        const auto out = combine(inputs, psi, Aggregator(AggregatorKind::Average));
        auto got = oracle::canonicalize(out).clusters;
        got.erase(oracle::canonicalize(out).claim);
        EXPECT_EQ(got, oracle::components(layer, table, 0.5));
        EXPECT_EQ(out.stats.similarity_comparisons, layer.size() * (layer.size() - 1) / 2);
    }
}

// --- validation catches corrupted outputs --------------------------------

class CorruptedSenate : public ::testing::Test {
protected:
    std::vector<TreeQbaf> inputs = fixtures::senate();
    Similarity psi{fixtures::senate_psi(), 0.5};
    Aggregator avg{AggregatorKind::Average};
    CombinedQbaf out = combine(inputs, psi, avg);

    CombinedReport check() { return validate_combined(inputs, out, psi, avg); }
    Cluster& cluster(std::size_t source, const std::string& id) { return out.clusters[find_cluster(out, source, id)]; }
};

TEST_F(CorruptedSenate, DroppedSupport) {
    out.supports.pop_back();
    const auto r = check();
    EXPECT_TRUE(r.has("lifting-complete")) << r.summary();
}

TEST_F(CorruptedSenate, InventedEdge) {
    out.attacks.push_back({find_cluster(out, 0, "c"), find_cluster(out, 1, "d")});
    const auto r = check();
    EXPECT_TRUE(r.has("lifting-sound")) << r.summary();
    EXPECT_TRUE(r.has("tree")) << r.summary();
}

TEST_F(CorruptedSenate, EdgeInBothRelations) {
    const auto e = out.attacks.front();
    out.supports.push_back(e);
    EXPECT_TRUE(check().has("qbaf"));
}

TEST_F(CorruptedSenate, MovedMember) {
    auto& from = cluster(1, "e'");
    auto moved = from.members.back();
    from.members.pop_back();
    cluster(1, "d").members.push_back(moved);
    const auto r = check();
    EXPECT_TRUE(r.has("base-score")) << r.summary();
    EXPECT_TRUE(r.has("grouping")) << r.summary();
}

TEST_F(CorruptedSenate, DuplicatedMember) {
    cluster(0, "c").members.push_back(cluster(1, "d").members.front());
    EXPECT_TRUE(check().has("partition"));
}

TEST_F(CorruptedSenate, MissingMember) {
    cluster(0, "c").members.clear();
    EXPECT_TRUE(check().has("partition"));
}

TEST_F(CorruptedSenate, WrongAggregatedScore) {
    cluster(0, "b").aggregated_base_score = 0.7;
    const auto r = check();
    EXPECT_TRUE(r.has("base-score")) << r.summary();
    EXPECT_EQ(r.failures(), 1u) << r.summary();
}

TEST_F(CorruptedSenate, SplitCluster) {
    auto& x2 = cluster(0, "b");
    Cluster split = x2;
    split.id = ArgumentId("x6");
    split.members.erase(split.members.begin());
    split.aggregated_base_score = split.members.front().base_score;
    x2.members.pop_back();
    x2.aggregated_base_score = x2.members.front().base_score;
    out.clusters.push_back(split);
    out.attacks.push_back({out.clusters.size() - 1, out.claim_cluster});
    // e and e' still point at b', which now sits in x6.
    for (auto& e : out.supports) {
        if (e.from == find_cluster(out, 1, "e")) {
            e.to = out.clusters.size() - 1;
        }
    }
    const auto r = check();
    EXPECT_TRUE(r.has("missed-merge")) << r.summary();
}

TEST_F(CorruptedSenate, ClaimOutsideClaimCluster) {
    auto& claim = out.clusters[out.claim_cluster];
    claim.members.pop_back();
    EXPECT_TRUE(check().has("claim-cluster"));
}

TEST_F(CorruptedSenate, ProvenanceMismatch) {
    out.provenance.threshold = 0.7;
    EXPECT_TRUE(check().has("provenance"));
}

TEST_F(CorruptedSenate, TamperedMemberScore) {
    cluster(0, "c").members.front().base_score = 0.1;
    cluster(0, "c").aggregated_base_score = 0.1;
    EXPECT_TRUE(check().has("provenance"));
}
