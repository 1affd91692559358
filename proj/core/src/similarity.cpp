#include "argmerge/similarity.hpp"

#include "argmerge/errors.hpp"
#include "argmerge/remote_embedder.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace argmerge {

namespace {

bool canonical_less(const ArgumentRef& a, const ArgumentRef& b) {
    if (a.source != b.source) {
        return a.source < b.source;
    }
    return a.id < b.id;
}

std::string qualified(const ArgumentRef& a) {
    return std::to_string(a.source) + ':' + std::string(a.id);
}

std::pair<std::string, std::string> ordered(std::string a, std::string b) {
    if (b < a) {
        std::swap(a, b);
    }
    return {std::move(a), std::move(b)};
}

std::uint64_t parse_uint(std::string_view text, std::string_view what) {
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw Error("invalid " + std::string(what) + " '" + std::string(text) + "'");
    }
    return value;
}

} // namespace

EmbeddingScorer::EmbeddingScorer(std::shared_ptr<EmbeddingProvider> provider)
    : provider_(std::move(provider)) {
    if (!provider_) {
        throw Error("EmbeddingScorer needs a provider");
    }
}

void EmbeddingScorer::prepare(std::span<const ArgumentRef> arguments) {
    std::vector<std::string> missing;
    {
        std::lock_guard lock(mutex_);
        for (const auto& a : arguments) {
            std::string t(a.text);
            if (!vectors_.contains(t) &&
                std::find(missing.begin(), missing.end(), t) == missing.end()) {
                missing.push_back(std::move(t));
            }
        }
    }
    if (missing.empty()) {
        return;
    }
    auto vectors = provider_->embed(missing);
    if (vectors.size() != missing.size()) {
        throw ProviderError("provider returned the wrong number of vectors", missing);
    }
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < missing.size(); ++i) {
        vectors_.try_emplace(std::move(missing[i]), std::move(vectors[i]));
    }
}

const EmbeddingVector& EmbeddingScorer::vector_for(std::string_view text) {
    {
        std::lock_guard lock(mutex_);
        auto it = vectors_.find(std::string(text));
        if (it != vectors_.end()) {
            return it->second;
        }
    }
    std::vector<std::string> one{std::string(text)};
    auto v = provider_->embed(one);
    if (v.size() != 1) {
        throw ProviderError("provider returned the wrong number of vectors", one);
    }
    std::lock_guard lock(mutex_);
    return vectors_.try_emplace(one.front(), std::move(v.front())).first->second;
}

double EmbeddingScorer::score(const ArgumentRef& x, const ArgumentRef& y) {
    if (x.text == y.text) {
        return 1.0;
    }
    return cosine(vector_for(x.text), vector_for(y.text));
}

TableScorer::TableScorer(double default_score, std::string label)
    : default_(default_score), label_(std::move(label)) {
    if (!std::isfinite(default_) || default_ < 0.0 || default_ > 1.0) {
        throw DomainError("default similarity outside [0,1]");
    }
}

TableScorer& TableScorer::set(std::string x, std::string y, double score) {
    if (!std::isfinite(score) || score < 0.0 || score > 1.0) {
        throw DomainError("similarity of ('" + x + "', '" + y + "') outside [0,1]");
    }
    table_.insert_or_assign(ordered(std::move(x), std::move(y)), score);
    return *this;
}

TableScorer TableScorer::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw SchemaError("cannot open similarity table " + path.string());
    }
    try {
        const auto doc = nlohmann::json::parse(in);
        TableScorer t(doc.value("default", 0.0), "table:" + path.filename().string());
        for (const auto& row : doc.at("pairs")) {
            if (!row.is_array() || row.size() != 3) {
                throw SchemaError(path.string() + ": each pair must be [x, y, score]");
            }
            t.set(row[0].get<std::string>(), row[1].get<std::string>(), row[2].get<double>());
        }
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

std::optional<double> TableScorer::lookup(const std::string& a, const std::string& b) const {
    auto it = table_.find(ordered(a, b));
    if (it == table_.end()) {
        return std::nullopt;
    }
    return it->second;
}

double TableScorer::score(const ArgumentRef& x, const ArgumentRef& y) {
    const std::string qx = qualified(x);
    const std::string qy = qualified(y);
    const std::string bx(x.id);
    const std::string by(y.id);
    for (const auto& [a, b] : {std::pair{qx, qy}, std::pair{qx, by}, std::pair{bx, qy},
                               std::pair{bx, by}}) {
        if (auto s = lookup(a, b)) {
            return *s;
        }
    }
    return default_;
}

Similarity::Similarity(std::shared_ptr<PairScorer> scorer, double threshold)
    : scorer_(std::move(scorer)), threshold_(threshold) {
    if (!scorer_) {
        throw Error("Similarity needs a scorer");
    }
    if (!std::isfinite(threshold_) || threshold_ < 0.0 || threshold_ > 1.0) {
        throw DomainError("similarity threshold outside [0,1]: " + std::to_string(threshold_));
    }
}

double Similarity::operator()(const ArgumentRef& x, const ArgumentRef& y) {
    if (x.source == y.source && x.id == y.id) {
        return 1.0;
    }
    const bool swap = canonical_less(y, x);
    const ArgumentRef& first = swap ? y : x;
    const ArgumentRef& second = swap ? x : y;

    std::string key = qualified(first);
    key.push_back('\x1f');
    key += qualified(second);
    {
        std::lock_guard lock(mutex_);
        if (auto it = memo_.find(key); it != memo_.end()) {
            return it->second;
        }
    }
    const double s = std::clamp(scorer_->score(first, second), 0.0, 1.0);
    std::lock_guard lock(mutex_);
    memo_.try_emplace(std::move(key), s);
    return s;
}

std::size_t Similarity::scorer_calls() const {
    std::lock_guard lock(mutex_);
    return memo_.size();
}

double similarity(const ArgumentRef& x, const ArgumentRef& y, Similarity& psi) {
    return psi(x, y);
}

std::shared_ptr<EmbeddingProvider> make_embedding_provider(std::string_view spec,
                                                           CachePolicy cache,
                                                           const std::filesystem::path& cache_path) {
    std::shared_ptr<EmbeddingProvider> base;
    if (spec == "offline" || spec.starts_with("offline:")) {
        std::size_t dim = kDefaultOfflineDimension;
        std::uint64_t seed = kDefaultOfflineSeed;
        if (spec.size() > 8) {
            auto rest = spec.substr(8);
            auto colon = rest.find(':');
            dim = parse_uint(rest.substr(0, colon), "offline dimension");
            if (colon != std::string_view::npos) {
                seed = parse_uint(rest.substr(colon + 1), "offline seed");
            }
        }
        base = std::make_shared<OfflineEmbedder>(dim, seed);
    } else if (spec == "remote") {
        base = std::make_shared<RemoteEmbedder>(RemoteEmbedderConfig::from_environment());
    } else {
        throw Error("unknown embedding provider '" + std::string(spec) +
                    "' (expected offline[:dim[:seed]] or remote)");
    }

    if (cache == CachePolicy::None) {
        return base;
    }
    auto store = std::make_shared<EmbeddingCache>();
    if (cache == CachePolicy::Persistent) {
        if (cache_path.empty()) {
            throw Error("persistent embedding cache needs a path");
        }
        store->load(cache_path);
        return std::make_shared<CachedProvider>(base, store, cache_path);
    }
    return std::make_shared<CachedProvider>(base, store);
}

std::shared_ptr<PairScorer> make_pair_scorer(const SimilarityConfig& config) {
    const std::string_view spec = config.provider;
    if (spec.starts_with("table:")) {
        return std::make_shared<TableScorer>(TableScorer::load(std::string(spec.substr(6))));
    }
    return std::make_shared<EmbeddingScorer>(make_embedding_provider(spec, config.cache, config.cache_path));
}

std::unique_ptr<Similarity> make_similarity(const SimilarityConfig& config) {
    return std::make_unique<Similarity>(make_pair_scorer(config), config.threshold);
}

} // namespace argmerge
