#include "topseg/embeddings.hpp"
#include "topseg/http_util.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace topseg {

using json = nlohmann::json;

struct RemoteEmbeddingProvider::Impl {
    EmbeddingEndpointConfig cfg;
    ParsedUrl url;
    mutable std::mutex mutex;
    std::size_t dimension = 0; // fixed by the first response

    explicit Impl(EmbeddingEndpointConfig c) : cfg(std::move(c)), url(parse_url(cfg.endpoint)) {}
};

RemoteEmbeddingProvider::RemoteEmbeddingProvider(EmbeddingEndpointConfig cfg)
    : impl_(std::make_unique<Impl>(std::move(cfg))) {}

RemoteEmbeddingProvider::~RemoteEmbeddingProvider() = default;

std::size_t RemoteEmbeddingProvider::dimension() const {
    std::lock_guard<std::mutex> lock(impl_->mutex);
    return impl_->dimension;
}

std::vector<std::vector<float>> RemoteEmbeddingProvider::embed(const std::string&, std::size_t,
                                                               std::span<const std::string> texts) {
    const EmbeddingEndpointConfig& cfg = impl_->cfg;
    json body = {{"input", std::vector<std::string>(texts.begin(), texts.end())}};
    std::string bearer;
    if (!cfg.auth_env.empty()) {
        const char* value = std::getenv(cfg.auth_env.c_str());
        if (value == nullptr || *value == '\0') {
            throw AuthError("environment variable " + cfg.auth_env + " is not set");
        }
        bearer = value;
    }

    std::string last_error;
    for (std::size_t attempt = 0; attempt <= cfg.retries; ++attempt) {
        if (attempt > 0) {
            double delay = cfg.backoff_seconds * std::pow(2.0, static_cast<double>(attempt - 1));
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        httplib::Client client(impl_->url.base);
        auto timeout = std::chrono::duration<double>(cfg.timeout_seconds);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        httplib::Headers headers;
        if (!bearer.empty()) {
            headers.emplace("Authorization", "Bearer " + bearer);
        }
        auto res = client.Post(impl_->url.path, headers, body.dump(), "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status == 401 || res->status == 403) {
            throw AuthError("embedding endpoint rejected auth (HTTP " + std::to_string(res->status) + ")");
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw ProviderError("embedding endpoint HTTP " + std::to_string(res->status));
        }
        std::vector<std::vector<float>> vectors;
        try {
            json doc = json::parse(res->body);
            vectors = doc.at("embeddings").get<std::vector<std::vector<float>>>();
        } catch (const json::exception& ex) {
            throw MalformedResponseError(std::string("bad embeddings payload: ") + ex.what());
        }
        if (vectors.size() != texts.size()) {
            throw ProviderError("embedding endpoint returned " + std::to_string(vectors.size()) +
                                " vectors for " + std::to_string(texts.size()) + " inputs");
        }
        std::lock_guard<std::mutex> lock(impl_->mutex);
        for (const auto& vec : vectors) {
            if (impl_->dimension == 0) {
                impl_->dimension = vec.size();
            }
            if (vec.size() != impl_->dimension) {
                throw DimensionMismatchError("embedding dimension " + std::to_string(vec.size()) +
                                             " != " + std::to_string(impl_->dimension));
            }
            for (float v : vec) {
                if (!std::isfinite(v)) {
                    throw ProviderError("non-finite embedding value from endpoint");
                }
            }
        }
        return vectors;
    }
    throw ProviderError("embedding request failed after " + std::to_string(cfg.retries + 1) +
                        " attempts: " + last_error);
}

} // namespace topseg
