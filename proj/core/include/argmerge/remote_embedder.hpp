#pragma once

// HTTP client for an external embedding service.
//
// Request body: {"<input_field>": [texts...]} plus "model" when configured.
// Response: the vectors are found by `response_path`, a dot-separated path
// where a "[]" suffix iterates an array, e.g. "data[].embedding" (OpenAI and
// Jina style) or "embeddings".

#include "argmerge/embedding.hpp"

#include <chrono>
#include <mutex>
#include <optional>
#include <string>

namespace argmerge {

struct RemoteEmbedderConfig {
    /// Full URL, e.g. "http://localhost:8080/v1/embeddings".
    std::string endpoint;
    /// Sent as a Bearer token; never logged or included in error messages.
    std::string api_key;
    std::string model;
    std::string input_field = "input";
    std::string response_path = "data[].embedding";
    int max_attempts = 4;
    std::chrono::milliseconds initial_backoff{200};
    std::chrono::seconds timeout{30};

    static constexpr const char* kEndpointEnv = "ARGMERGE_EMBEDDING_URL";
    static constexpr const char* kApiKeyEnv = "ARGMERGE_EMBEDDING_KEY";
    static constexpr const char* kModelEnv = "ARGMERGE_EMBEDDING_MODEL";
    static constexpr const char* kInputFieldEnv = "ARGMERGE_EMBEDDING_INPUT_FIELD";
    static constexpr const char* kResponsePathEnv = "ARGMERGE_EMBEDDING_RESPONSE_PATH";

    /// Throws Error if the endpoint variable is unset.
    static RemoteEmbedderConfig from_environment();
};

class RemoteEmbedder final : public EmbeddingProvider {
public:
    explicit RemoteEmbedder(RemoteEmbedderConfig config);

    std::string id() const override;
    /// Retries transient failures (no response, 429, 5xx) with exponential
    /// backoff. Throws ProviderError on exhaustion, a malformed response, or
    /// a dimension that differs from earlier batches.
    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;

    std::size_t requests_sent() const noexcept { return requests_; }

private:
    RemoteEmbedderConfig config_;
    std::string scheme_host_port_;
    std::string path_;
    std::mutex mutex_;
    std::optional<std::size_t> dimension_;
    std::atomic<std::size_t> requests_{0};
};

std::vector<EmbeddingVector> embed_remote(std::span<const std::string> texts,
                                          const RemoteEmbedderConfig& config);

} // namespace argmerge
