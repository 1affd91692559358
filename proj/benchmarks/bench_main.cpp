#include "argmerge/combinator.hpp"
#include "argmerge/dfquad.hpp"
#include "argmerge/retrieval.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace argmerge;

namespace {

// Node i hangs off a random earlier node.
TreeQbaf random_tree(std::mt19937_64& rng, std::size_t n) {
    static const char* words[] = {"rates", "bank", "vote", "senate", "growth", "inflation", "court", "merger",
                                  "harvest", "drought", "election", "policy", "market", "earnings"};
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    QbafBuilder b;
    for (std::size_t i = 0; i < n; ++i) {
        std::string text;
        for (int w = 0; w < 5; ++w) {
            text += std::string(w ? " " : "") + words[rng() % 14];
        }
        b.add_argument(ArgumentId("n" + std::to_string(i)), text, unit(rng));
    }
    for (std::size_t i = 1; i < n; ++i) {
        b.add_edge(ArgumentId("n" + std::to_string(i)), ArgumentId("n" + std::to_string(rng() % i)),
                   rng() % 2 ? Relation::Attack : Relation::Support);
    }
    return TreeQbaf::make(b.build(), ArgumentId("n0"));
}

void BM_Strengths(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const auto t = random_tree(rng, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate_strengths(t));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Strengths)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

void BM_Combine(benchmark::State& state) {
    std::mt19937_64 rng(2);
    const std::vector<TreeQbaf> inputs{random_tree(rng, state.range(0)), random_tree(rng, state.range(0)),
                                       random_tree(rng, state.range(0))};
    SimilarityConfig config;
    const auto scorer = make_pair_scorer(config);
    const Aggregator avg(AggregatorKind::Average);
    for (auto _ : state) {
        Similarity psi(scorer, config.threshold);
        benchmark::DoNotOptimize(combine(inputs, psi, avg));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Combine)->RangeMultiplier(2)->Range(25, 400)->Complexity();

void BM_Retrieve(benchmark::State& state) {
    std::mt19937_64 rng(3);
    OfflineEmbedder e(256, 7);
    std::vector<CorpusDocument> docs;
    for (std::int64_t i = 0; i < state.range(0); ++i) {
        docs.push_back({"d" + std::to_string(i),
                        std::chrono::year_month_day(std::chrono::sys_days(std::chrono::year{2020} / 1 / 1) +
                                                    std::chrono::days(rng() % 1400)),
                        random_tree(rng, 1).qbaf().arguments()[0].text, "bench"});
    }
    const auto index = ingest(docs, e, 256);
    const auto cutoff = std::chrono::year{2023} / 1 / 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(retrieve(index, e, "senate vote on inflation policy", cutoff));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Retrieve)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

} // namespace

BENCHMARK_MAIN();
