#pragma once

// Argument similarity: a symmetric score in [0,1] with self-similarity 1,
// plus the merge threshold.

#include "argmerge/embedding.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>

namespace argmerge {

/// An argument as seen by similarity scoring. Identity is (source, id);
/// text is only ever used for scoring.
struct ArgumentRef {
    std::size_t source = 0;
    std::string_view id;
    std::string_view text;
};

/// Raw pair scoring behind Similarity. Implementations may assume the pair
/// is already in canonical order and not an argument paired with itself.
class PairScorer {
public:
    virtual ~PairScorer() = default;
    virtual std::string id() const = 0;
    /// Hint that these arguments are about to be scored; lets embedding
    /// scorers fetch vectors in one batch.
    virtual void prepare(std::span<const ArgumentRef> /*arguments*/) {}
    virtual double score(const ArgumentRef& x, const ArgumentRef& y) = 0;
};

/// Cosine of provider embeddings. Identical texts score 1 without a provider call.
class EmbeddingScorer final : public PairScorer {
public:
    explicit EmbeddingScorer(std::shared_ptr<EmbeddingProvider> provider);

    std::string id() const override { return provider_->id(); }
    void prepare(std::span<const ArgumentRef> arguments) override;
    double score(const ArgumentRef& x, const ArgumentRef& y) override;

private:
    const EmbeddingVector& vector_for(std::string_view text);

    std::shared_ptr<EmbeddingProvider> provider_;
    std::mutex mutex_;
    std::unordered_map<std::string, EmbeddingVector> vectors_;
};

/// Explicit pair -> score table; unlisted pairs get the default.
///
/// Keys are argument ids, optionally qualified by source as "<source>:<id>".
/// A qualified entry wins over a bare one.
class TableScorer final : public PairScorer {
public:
    explicit TableScorer(double default_score = 0.0, std::string label = "table");

    /// Throws DomainError on a score outside [0,1].
    TableScorer& set(std::string x, std::string y, double score);

    /// JSON: {"default": 0.0, "pairs": [["b", "b'", 0.9], ...]}. Throws SchemaError.
    static TableScorer load(const std::filesystem::path& path);

    std::string id() const override { return label_; }
    double score(const ArgumentRef& x, const ArgumentRef& y) override;

    double default_score() const noexcept { return default_; }
    const std::map<std::pair<std::string, std::string>, double>& entries() const noexcept {
        return table_;
    }

private:
    std::optional<double> lookup(const std::string& a, const std::string& b) const;

    double default_;
    std::string label_;
    std::map<std::pair<std::string, std::string>, double> table_;
};

enum class CachePolicy { None, Memory, Persistent };

struct SimilarityConfig {
    /// Merge threshold delta.
    double threshold = 0.5;
    /// "offline[:dim[:seed]]", "table:<path>", or "remote".
    std::string provider = "offline";
    CachePolicy cache = CachePolicy::Memory;
    std::filesystem::path cache_path;
};

/// Psi. Symmetric by construction: pairs are put in (source, id) order
/// before scoring and memoization. Thread-safe.
class Similarity {
public:
    Similarity(std::shared_ptr<PairScorer> scorer, double threshold);

    double operator()(const ArgumentRef& x, const ArgumentRef& y);
    bool similar(const ArgumentRef& x, const ArgumentRef& y) { return (*this)(x, y) >= threshold_; }
    void prepare(std::span<const ArgumentRef> arguments) { scorer_->prepare(arguments); }

    double threshold() const noexcept { return threshold_; }
    std::string provider_id() const { return scorer_->id(); }
    /// Distinct pairs sent to the scorer so far.
    std::size_t scorer_calls() const;

private:
    std::shared_ptr<PairScorer> scorer_;
    double threshold_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, double> memo_;
};

/// Psi(x, y) under `psi`.
double similarity(const ArgumentRef& x, const ArgumentRef& y, Similarity& psi);

/// Builds "offline[:dim[:seed]]" or "remote" providers, wrapped in a cache
/// when requested. Throws Error on an unknown spec.
std::shared_ptr<EmbeddingProvider> make_embedding_provider(
    std::string_view spec, CachePolicy cache = CachePolicy::Memory,
    const std::filesystem::path& cache_path = {});

/// The scorer named by config.provider, without threshold or memo; can be
/// shared by several Similarity instances.
std::shared_ptr<PairScorer> make_pair_scorer(const SimilarityConfig& config);

/// Throws DomainError when the threshold is outside [0,1].
std::unique_ptr<Similarity> make_similarity(const SimilarityConfig& config);

inline constexpr std::size_t kDefaultOfflineDimension = 256;
inline constexpr std::uint64_t kDefaultOfflineSeed = 7;

} // namespace argmerge
