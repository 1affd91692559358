#include "argmerge/embedding.hpp"

#include "argmerge/errors.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <unordered_set>

namespace argmerge {

namespace {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ (seed * 0x9e3779b97f4a7c15ULL);
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    // Final avalanche (splitmix64) so nearby grams spread across buckets.
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebULL;
    h ^= h >> 31;
    return h;
}

} // namespace

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
        throw DomainError("embedding vector must have positive dimension");
    }
    for (double v : values_) {
        if (!std::isfinite(v)) {
            throw DomainError("embedding vector has a non-finite component");
        }
    }
}

double raw_cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
    if (u.dimension() != v.dimension()) {
        throw DimensionMismatch("cosine of vectors with dimensions " +
                                std::to_string(u.dimension()) + " and " +
                                std::to_string(v.dimension()));
    }
    double dot = 0.0;
    double uu = 0.0;
    double vv = 0.0;
    for (std::size_t i = 0; i < u.dimension(); ++i) {
        dot += u[i] * v[i];
        uu += u[i] * u[i];
        vv += v[i] * v[i];
    }
    if (uu == 0.0 || vv == 0.0) {
        throw ZeroVector("cosine of an all-zero vector");
    }
    return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
    return std::max(0.0, raw_cosine(u, v));
}

std::string content_hash(std::string_view text) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(length * 2);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xF]);
    }
    return out;
}

OfflineEmbedder::OfflineEmbedder(std::size_t dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {
    if (dimension < kMinDimension) {
        throw DomainError("offline embedder dimension must be at least " +
                          std::to_string(kMinDimension));
    }
}

std::string OfflineEmbedder::id() const {
    return "offline:" + std::to_string(dimension_) + ":" + std::to_string(seed_);
}

EmbeddingVector OfflineEmbedder::embed_one(std::string_view text) const {
    std::string padded;
    padded.reserve(text.size() + 2);
    padded.push_back(' ');
    for (unsigned char c : text) {
        padded.push_back(static_cast<char>(std::tolower(c)));
    }
    padded.push_back(' ');

    std::vector<double> v(dimension_, 0.0);
    if (padded.size() < kNgram) {
        v[fnv1a(padded, seed_) % dimension_] = 1.0;
        return EmbeddingVector(std::move(v));
    }
    for (std::size_t i = 0; i + kNgram <= padded.size(); ++i) {
        v[fnv1a(std::string_view(padded).substr(i, kNgram), seed_) % dimension_] += 1.0;
    }
    double norm = 0.0;
    for (double x : v) {
        norm += x * x;
    }
    norm = std::sqrt(norm);
    for (double& x : v) {
        x /= norm;
    }
    return EmbeddingVector(std::move(v));
}

std::vector<EmbeddingVector> OfflineEmbedder::embed(std::span<const std::string> texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        out.push_back(embed_one(t));
    }
    return out;
}

std::vector<EmbeddingVector> embed_offline(std::span<const std::string> texts,
                                           std::size_t dimension, std::uint64_t seed) {
    return OfflineEmbedder(dimension, seed).embed(texts);
}

std::string EmbeddingCache::key(const std::string& provider_id, std::string_view text) {
    return provider_id + '#' + content_hash(text);
}

std::optional<EmbeddingVector> EmbeddingCache::get(const std::string& provider_id,
                                                   std::string_view text) const {
    const auto k = key(provider_id, text);
    std::lock_guard lock(mutex_);
    auto it = entries_.find(k);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void EmbeddingCache::put(const std::string& provider_id, std::string_view text, EmbeddingVector v) {
    auto k = key(provider_id, text);
    std::lock_guard lock(mutex_);
    entries_.insert_or_assign(std::move(k), std::move(v));
}

std::size_t EmbeddingCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

void EmbeddingCache::save(const std::filesystem::path& path) const {
    nlohmann::json doc;
    doc["format"] = "argmerge-embedding-cache";
    doc["version"] = 1;
    auto& entries = doc["entries"] = nlohmann::json::object();
    {
        std::lock_guard lock(mutex_);
        for (const auto& [k, v] : entries_) {
            entries[k] = std::vector<double>(v.values().begin(), v.values().end());
        }
    }
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write embedding cache " + path.string());
    }
    out << doc.dump() << '\n';
}

void EmbeddingCache::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        return;
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("embedding cache " + path.string() + ": " + e.what());
    }
    if (doc.value("format", "") != "argmerge-embedding-cache" || doc.value("version", 0) != 1) {
        throw SchemaError("embedding cache " + path.string() + ": unrecognized format");
    }
    std::lock_guard lock(mutex_);
    for (const auto& [k, v] : doc.at("entries").items()) {
        entries_.insert_or_assign(k, EmbeddingVector(v.get<std::vector<double>>()));
    }
}

CachedProvider::CachedProvider(std::shared_ptr<EmbeddingProvider> inner,
                               std::shared_ptr<EmbeddingCache> cache,
                               std::filesystem::path persist_path)
    : inner_(std::move(inner)), cache_(std::move(cache)), persist_path_(std::move(persist_path)) {
    if (!inner_ || !cache_) {
        throw Error("CachedProvider needs a provider and a cache");
    }
}

std::vector<EmbeddingVector> CachedProvider::embed(std::span<const std::string> texts) {
    const std::string pid = inner_->id();
    std::vector<std::optional<EmbeddingVector>> found(texts.size());
    std::vector<std::string> misses;
    std::unordered_set<std::string> queued;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        found[i] = cache_->get(pid, texts[i]);
        if (!found[i] && queued.insert(texts[i]).second) {
            misses.push_back(texts[i]);
        }
    }
    if (!misses.empty()) {
        auto fresh = inner_->embed(misses);
        ++forwarded_calls_;
        forwarded_texts_ += misses.size();
        if (fresh.size() != misses.size()) {
            throw ProviderError("provider returned " + std::to_string(fresh.size()) +
                                    " vectors for " + std::to_string(misses.size()) + " texts",
                                misses);
        }
        for (std::size_t i = 0; i < misses.size(); ++i) {
            cache_->put(pid, misses[i], std::move(fresh[i]));
        }
        if (!persist_path_.empty()) {
            std::lock_guard lock(persist_mutex_);
            cache_->save(persist_path_);
        }
        for (std::size_t i = 0; i < texts.size(); ++i) {
            if (!found[i]) {
                found[i] = cache_->get(pid, texts[i]);
            }
        }
    }
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (auto& f : found) {
        out.push_back(std::move(*f));
    }
    return out;
}

} // namespace argmerge
