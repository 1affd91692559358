#include "argmerge/remote_embedder.hpp"

#include "argmerge/errors.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <sstream>
#include <thread>

namespace argmerge {

namespace {

using nlohmann::json;

std::string env_or(const char* name, std::string fallback) {
    const char* v = std::getenv(name);
    return (v && *v) ? std::string(v) : std::move(fallback);
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> out;
    std::stringstream ss(path);
    std::string token;
    while (std::getline(ss, token, '.')) {
        if (!token.empty()) {
            out.push_back(token);
        }
    }
    return out;
}

std::vector<const json*> resolve(const json& root, const std::string& path) {
    std::vector<const json*> nodes{&root};
    for (std::string token : split_path(path)) {
        bool iterate = false;
        if (token.size() >= 2 && token.compare(token.size() - 2, 2, "[]") == 0) {
            iterate = true;
            token.resize(token.size() - 2);
        }
        std::vector<const json*> next;
        for (const json* n : nodes) {
            const json* cur = n;
            if (!token.empty()) {
                if (!cur->is_object() || !cur->contains(token)) {
                    throw std::runtime_error("missing field '" + token + "'");
                }
                cur = &(*cur)[token];
            }
            if (iterate) {
                if (!cur->is_array()) {
                    throw std::runtime_error("field '" + token + "' is not an array");
                }
                for (const auto& e : *cur) {
                    next.push_back(&e);
                }
            } else {
                next.push_back(cur);
            }
        }
        nodes = std::move(next);
    }
    // A single array of arrays stands for the list of vectors itself.
    if (nodes.size() == 1 && nodes.front()->is_array() && !nodes.front()->empty() &&
        nodes.front()->front().is_array()) {
        std::vector<const json*> expanded;
        for (const auto& e : *nodes.front()) {
            expanded.push_back(&e);
        }
        return expanded;
    }
    return nodes;
}

bool transient(int status) {
    return status == 429 || status >= 500;
}

} // namespace

RemoteEmbedderConfig RemoteEmbedderConfig::from_environment() {
    RemoteEmbedderConfig c;
    c.endpoint = env_or(kEndpointEnv, "");
    if (c.endpoint.empty()) {
        throw Error(std::string("remote embedding provider requires ") + kEndpointEnv);
    }
    c.api_key = env_or(kApiKeyEnv, "");
    c.model = env_or(kModelEnv, "");
    c.input_field = env_or(kInputFieldEnv, c.input_field);
    c.response_path = env_or(kResponsePathEnv, c.response_path);
    return c;
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig config) : config_(std::move(config)) {
    const auto scheme_end = config_.endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw Error("embedding endpoint must be a URL with a scheme: " + config_.endpoint);
    }
    const auto path_start = config_.endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        scheme_host_port_ = config_.endpoint;
        path_ = "/";
    } else {
        scheme_host_port_ = config_.endpoint.substr(0, path_start);
        path_ = config_.endpoint.substr(path_start);
    }
    if (config_.max_attempts < 1) {
        config_.max_attempts = 1;
    }
}

std::string RemoteEmbedder::id() const {
    return "remote:" + (config_.model.empty() ? config_.endpoint : config_.model);
}

std::vector<EmbeddingVector> RemoteEmbedder::embed(std::span<const std::string> texts) {
    std::vector<std::string> batch(texts.begin(), texts.end());
    if (batch.empty()) {
        return {};
    }

    json body;
    body[config_.input_field] = batch;
    if (!config_.model.empty()) {
        body["model"] = config_.model;
    }
    const std::string payload = body.dump();

    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.api_key);
    }

    std::string last_failure;
    auto backoff = config_.initial_backoff;
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        ++requests_;
        auto res = client.Post(path_, headers, payload, "application/json");
        if (!res) {
            last_failure = "connection failed: " + httplib::to_string(res.error());
        } else if (transient(res->status)) {
            last_failure = "HTTP " + std::to_string(res->status);
        } else if (res->status < 200 || res->status >= 300) {
            throw ProviderError("embedding service returned HTTP " + std::to_string(res->status),
                                batch);
        } else {
            std::vector<EmbeddingVector> out;
            try {
                const json doc = json::parse(res->body);
                for (const json* node : resolve(doc, config_.response_path)) {
                    out.emplace_back(node->get<std::vector<double>>());
                }
            } catch (const std::exception& e) {
                throw ProviderError(std::string("malformed embedding response: ") + e.what(), batch);
            }
            if (out.size() != batch.size()) {
                throw ProviderError("malformed embedding response: " + std::to_string(out.size()) +
                                        " vectors for " + std::to_string(batch.size()) + " texts",
                                    batch);
            }
            std::lock_guard lock(mutex_);
            for (const auto& v : out) {
                if (!dimension_) {
                    dimension_ = v.dimension();
                }
                if (v.dimension() != *dimension_) {
                    throw ProviderError("embedding dimension drift: expected " +
                                            std::to_string(*dimension_) + ", got " +
                                            std::to_string(v.dimension()),
                                        batch);
                }
            }
            return out;
        }
        if (attempt < config_.max_attempts) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    throw ProviderError("embedding service unavailable after " +
                            std::to_string(config_.max_attempts) + " attempts (" + last_failure + ")",
                        batch);
}

std::vector<EmbeddingVector> embed_remote(std::span<const std::string> texts,
                                          const RemoteEmbedderConfig& config) {
    if (texts.empty()) {
        throw EmptyInput("embed_remote needs a non-empty batch");
    }
    return RemoteEmbedder(config).embed(texts);
}

} // namespace argmerge
