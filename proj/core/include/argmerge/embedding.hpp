#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace argmerge {

/// Fixed-length vector of finite components.
class EmbeddingVector {
public:
    EmbeddingVector() = default;
    /// Throws DomainError on a non-finite component or an empty vector.
    explicit EmbeddingVector(std::vector<double> values);

    std::size_t dimension() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

private:
    std::vector<double> values_;
};

/// Cosine similarity clamped below at 0. Throws DimensionMismatch or ZeroVector.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);
/// Unclamped cosine in [-1,1].
double raw_cosine(const EmbeddingVector& u, const EmbeddingVector& v);

/// Hex SHA-256 of the text bytes.
std::string content_hash(std::string_view text);

/// Turns texts into vectors. Implementations must be deterministic for
/// identical text and safe to call from several threads.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    /// Stable identifier; also used to key caches and stamp indexes.
    virtual std::string id() const = 0;
    /// One vector per text, in input order. Throws ProviderError.
    virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
};

/// Hashed character-trigram frequency vectors, L2-normalized.
class OfflineEmbedder final : public EmbeddingProvider {
public:
    static constexpr std::size_t kMinDimension = 8;
    static constexpr std::size_t kNgram = 3;

    /// Throws DomainError if dimension < kMinDimension.
    OfflineEmbedder(std::size_t dimension, std::uint64_t seed);

    std::string id() const override;
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
    EmbeddingVector embed_one(std::string_view text) const;

    std::size_t dimension() const noexcept { return dimension_; }

private:
    std::size_t dimension_;
    std::uint64_t seed_;
};

std::vector<EmbeddingVector> embed_offline(std::span<const std::string> texts,
                                           std::size_t dimension, std::uint64_t seed);

/// Thread-safe map (provider id, content hash) -> vector, optionally
/// persisted as JSON.
class EmbeddingCache {
public:
    std::optional<EmbeddingVector> get(const std::string& provider_id, std::string_view text) const;
    void put(const std::string& provider_id, std::string_view text, EmbeddingVector v);
    std::size_t size() const;

    void save(const std::filesystem::path& path) const;
    /// Merges entries from `path`; a missing file is not an error.
    void load(const std::filesystem::path& path);

private:
    static std::string key(const std::string& provider_id, std::string_view text);

    mutable std::mutex mutex_;
    std::unordered_map<std::string, EmbeddingVector> entries_;
};

/// Serves repeated texts from a cache and forwards only misses, in one
/// batch, to the wrapped provider. With a persist path, the cache is written
/// back after every batch that added entries.
class CachedProvider final : public EmbeddingProvider {
public:
    CachedProvider(std::shared_ptr<EmbeddingProvider> inner, std::shared_ptr<EmbeddingCache> cache,
                   std::filesystem::path persist_path = {});

    std::string id() const override { return inner_->id(); }
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;

    std::size_t forwarded_calls() const noexcept { return forwarded_calls_; }
    std::size_t forwarded_texts() const noexcept { return forwarded_texts_; }
    const std::shared_ptr<EmbeddingCache>& cache() const noexcept { return cache_; }

private:
    std::shared_ptr<EmbeddingProvider> inner_;
    std::shared_ptr<EmbeddingCache> cache_;
    std::filesystem::path persist_path_;
    std::mutex persist_mutex_;
    std::atomic<std::size_t> forwarded_calls_{0};
    std::atomic<std::size_t> forwarded_texts_{0};
};

} // namespace argmerge
