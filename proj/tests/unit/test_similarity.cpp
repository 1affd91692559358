#include "argmerge/embedding.hpp"
#include "argmerge/errors.hpp"
#include "argmerge/similarity.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cctype>
#include <cmath>
#include <map>

using namespace argmerge;

namespace {

// Exact character-trigram cosine, no hashing.
double trigram_cosine(const std::string& x, const std::string& y) {
    const auto grams = [](const std::string& s) {
        std::string p = " ";
        for (unsigned char c : s) {
            p.push_back(static_cast<char>(std::tolower(c)));
        }
        p.push_back(' ');
        std::map<std::string, double> g;
        for (std::size_t i = 0; i + 3 <= p.size(); ++i) {
            g[p.substr(i, 3)] += 1;
        }
        return g;
    };
    const auto a = grams(x);
    const auto b = grams(y);
    double dot = 0, na = 0, nb = 0;
    for (const auto& [k, v] : a) {
        na += v * v;
        if (auto it = b.find(k); it != b.end()) {
            dot += v * it->second;
        }
    }
    for (const auto& [k, v] : b) {
        nb += v * v;
    }
    return dot / std::sqrt(na * nb);
}

class CountingProvider final : public EmbeddingProvider {
public:
    std::string id() const override { return "counting"; }
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override {
        ++calls;
        texts_seen += texts.size();
        return inner.embed(texts);
    }
    OfflineEmbedder inner{64, 1};
    std::size_t calls = 0;
    std::size_t texts_seen = 0;
};

ArgumentRef ref(std::size_t source, std::string_view id, std::string_view text) {
    return ArgumentRef{source, id, text};
}

} // namespace

TEST(Cosine, BasicProperties) {
    const EmbeddingVector u({1.0, 0.0});
    const EmbeddingVector v({0.0, 2.0});
    const EmbeddingVector w({-1.0, 0.0});
    EXPECT_DOUBLE_EQ(cosine(u, u), 1.0);
    EXPECT_DOUBLE_EQ(cosine(u, v), 0.0);
    EXPECT_DOUBLE_EQ(raw_cosine(u, w), -1.0);
    EXPECT_DOUBLE_EQ(cosine(u, w), 0.0);
    EXPECT_THROW(cosine(u, EmbeddingVector({1.0, 2.0, 3.0})), DimensionMismatch);
    EXPECT_THROW(cosine(u, EmbeddingVector({0.0, 0.0})), ZeroVector);
    EXPECT_THROW(EmbeddingVector(std::vector<double>{}), DomainError);
    EXPECT_THROW(EmbeddingVector({INFINITY}), DomainError);
}

TEST(OfflineEmbedder, DeterministicAndNormalized) {
    const std::vector<std::string> texts{"Judgmental forecasting", "", "a"};
    const auto a = embed_offline(texts, 128, 7);
    const auto b = embed_offline(texts, 128, 7);
    EXPECT_EQ(a, b);
    for (const auto& v : a) {
        double n = 0;
        for (double x : v.values()) {
            n += x * x;
        }
        EXPECT_NEAR(n, 1.0, 1e-12);
    }
    EXPECT_NE(embed_offline(texts, 128, 8), a);
    EXPECT_EQ(OfflineEmbedder(128, 7).id(), "offline:128:7");
    EXPECT_THROW(OfflineEmbedder(4, 1), DomainError);
}

TEST(OfflineEmbedder, MatchesExactTrigramCosineWhenBucketsDoNotCollide) {
    const std::string x = "judgmental forecasting";
    const std::string y = "forecasting judgmental";
    const double exact = trigram_cosine(x, y);
    EXPECT_NEAR(exact, 0.9545454545, 1e-9);
    const std::vector<std::string> texts{x, y};
    const auto v = embed_offline(texts, 4096, 7);
    EXPECT_NEAR(cosine(v[0], v[1]), exact, 1e-9);
    EXPECT_GT(cosine(v[0], v[1]), 0.5);
}

TEST(OfflineEmbedder, DisjointTrigramsScoreZero) {
    const std::vector<std::string> texts{"abc", "xyz"};
    const auto v = embed_offline(texts, 256, 7);
    EXPECT_EQ(trigram_cosine("abc", "xyz"), 0.0);
    EXPECT_EQ(cosine(v[0], v[1]), 0.0);
}

TEST(ContentHash, Sha256) {
    EXPECT_EQ(content_hash("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(CachedProvider, ForwardsOnlyMisses) {
    auto inner = std::make_shared<CountingProvider>();
    auto cache = std::make_shared<EmbeddingCache>();
    CachedProvider p(inner, cache);
    const std::vector<std::string> first{"x", "y", "x"};
    const auto a = p.embed(first);
    EXPECT_EQ(inner->calls, 1u);
    EXPECT_EQ(inner->texts_seen, 2u);
    EXPECT_EQ(a[0], a[2]);
    const std::vector<std::string> second{"y", "z"};
    p.embed(second);
    EXPECT_EQ(inner->texts_seen, 3u);
    p.embed(first);
    EXPECT_EQ(inner->calls, 2u);
    EXPECT_EQ(p.forwarded_calls(), 2u);
}

TEST(CachedProvider, PersistentCacheSurvivesReload) {
    fixtures::TempDir dir("cache");
    const auto path = dir / "cache.json";
    {
        auto inner = std::make_shared<CountingProvider>();
        auto cache = std::make_shared<EmbeddingCache>();
        CachedProvider p(inner, cache, path);
        const std::vector<std::string> t{"alpha", "beta"};
        p.embed(t);
    }
    auto inner = std::make_shared<CountingProvider>();
    auto cache = std::make_shared<EmbeddingCache>();
    cache->load(path);
    EXPECT_EQ(cache->size(), 2u);
    CachedProvider p(inner, cache, path);
    const std::vector<std::string> t{"beta", "alpha"};
    p.embed(t);
    EXPECT_EQ(inner->calls, 0u);
}

TEST(TableScorer, LookupRules) {
    TableScorer t(0.1);
    t.set("b", "b'", 0.9).set("1:e", "0:e", 0.7);
    EXPECT_EQ(t.score(ref(0, "b", ""), ref(1, "b'", "")), 0.9);
    EXPECT_EQ(t.score(ref(1, "b'", ""), ref(0, "b", "")), 0.9);
    EXPECT_EQ(t.score(ref(0, "e", ""), ref(1, "e", "")), 0.7);
    EXPECT_EQ(t.score(ref(0, "c", ""), ref(0, "d", "")), 0.1);
    EXPECT_THROW(t.set("p", "q", 1.5), DomainError);
}

TEST(TableScorer, LoadsSenateFile) {
    const auto t = fixtures::senate_psi();
    EXPECT_EQ(t->default_score(), 0.0);
    EXPECT_EQ(t->score(ref(0, "e", ""), ref(1, "e'", "")), 0.6);
}

TEST(Similarity, SymmetricSelfOneAndMemoized) {
    auto inner = std::make_shared<CountingProvider>();
    Similarity psi(std::make_shared<EmbeddingScorer>(inner), 0.5);
    const auto x = ref(0, "x", "markets fall sharply");
    const auto y = ref(1, "y", "markets drop sharply");
    EXPECT_EQ(psi(x, x), 1.0);
    const double s = psi(x, y);
    EXPECT_EQ(psi(y, x), s);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
    EXPECT_EQ(psi.scorer_calls(), 1u);
    EXPECT_EQ(psi.similar(x, y), s >= 0.5);
}

TEST(Similarity, IdenticalTextIsOneWithoutProviderCall) {
    auto inner = std::make_shared<CountingProvider>();
    Similarity psi(std::make_shared<EmbeddingScorer>(inner), 0.5);
    EXPECT_EQ(psi(ref(0, "a", "same words"), ref(1, "b", "same words")), 1.0);
    EXPECT_EQ(inner->calls, 0u);
}

TEST(Similarity, PrepareBatchesOneCall) {
    auto inner = std::make_shared<CountingProvider>();
    Similarity psi(std::make_shared<EmbeddingScorer>(inner), 0.5);
    const std::vector<ArgumentRef> layer{ref(0, "a", "one"), ref(0, "b", "two"), ref(1, "c", "three"),
                                         ref(1, "d", "one")};
    psi.prepare(layer);
    EXPECT_EQ(inner->calls, 1u);
    EXPECT_EQ(inner->texts_seen, 3u);
    for (const auto& x : layer) {
        for (const auto& y : layer) {
            psi(x, y);
        }
    }
    EXPECT_EQ(inner->calls, 1u);
}

TEST(Similarity, ThresholdDomain) {
    EXPECT_THROW(Similarity(std::make_shared<TableScorer>(), 1.5), DomainError);
    SimilarityConfig c;
    c.threshold = -0.1;
    EXPECT_THROW(make_similarity(c), DomainError);
}

TEST(Similarity, ProviderSpecs) {
    EXPECT_EQ(make_embedding_provider("offline", CachePolicy::None)->id(), "offline:256:7");
    EXPECT_EQ(make_embedding_provider("offline:64:3")->id(), "offline:64:3");
    EXPECT_THROW(make_embedding_provider("offline:x"), Error);
    EXPECT_THROW(make_embedding_provider("bogus"), Error);
    SimilarityConfig c;
    c.provider = "table:" + fixtures::data("senate.psi.json").string();
    EXPECT_EQ(make_similarity(c)->provider_id(), "table:senate.psi.json");
}
