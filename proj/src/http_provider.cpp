#include "topseg/gateway.hpp"
#include "topseg/http_util.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <semaphore>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace topseg {

using json = nlohmann::json;

ParsedUrl parse_url(const std::string& url) {
    ParsedUrl out;
    std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("endpoint URL must include a scheme: " + url);
    }
    std::size_t host_begin = scheme_end + 3;
    std::size_t path_begin = url.find('/', host_begin);
    if (path_begin == std::string::npos) {
        out.base = url;
        out.path = "/";
    } else {
        out.base = url.substr(0, path_begin);
        out.path = url.substr(path_begin);
    }
    return out;
}

struct HttpChatProvider::Impl {
    ProviderConfig cfg;
    ParsedUrl url;
    std::counting_semaphore<> slots;

    explicit Impl(ProviderConfig c)
        : cfg(std::move(c)), url(parse_url(cfg.endpoint)),
          slots(static_cast<std::ptrdiff_t>(cfg.max_concurrent > 0 ? cfg.max_concurrent : 1)) {}

    std::string token() const {
        if (cfg.auth_env.empty()) {
            return {};
        }
        const char* value = std::getenv(cfg.auth_env.c_str());
        if (value == nullptr || *value == '\0') {
            throw AuthError("environment variable " + cfg.auth_env + " is not set");
        }
        return value;
    }

    json build_body(const ChatRequest& req) const {
        json messages = json::array();
        if (!req.system.empty()) {
            messages.push_back({{"role", "system"}, {"content", req.system}});
        }
        for (const ChatMessage& m : req.messages) {
            messages.push_back({{"role", std::string(role_name(m.role))}, {"content", m.content}});
        }
        json body = {
            {"model", cfg.model},
            {"messages", std::move(messages)},
            {"max_tokens", req.decoding.max_output_tokens},
        };
        if (req.decoding.deterministic) {
            body["temperature"] = 0.0;
        }
        return body;
    }
};

HttpChatProvider::HttpChatProvider(ProviderConfig cfg) {
    cfg.validate();
    impl_ = std::make_unique<Impl>(std::move(cfg));
}

HttpChatProvider::~HttpChatProvider() = default;

std::string HttpChatProvider::complete(const ChatRequest& request) {
    const ProviderConfig& cfg = impl_->cfg;
    std::string body = impl_->build_body(request).dump();
    std::string bearer = impl_->token();

    impl_->slots.acquire();
    struct Release {
        std::counting_semaphore<>& s;
        ~Release() { s.release(); }
    } release{impl_->slots};

    bool last_was_timeout = false;
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
        client.set_write_timeout(timeout);
        httplib::Headers headers;
        if (!bearer.empty()) {
            headers.emplace("Authorization", "Bearer " + bearer);
        }

        auto res = client.Post(impl_->url.path, headers, body, "application/json");
        if (!res) {
            auto err = res.error();
            last_was_timeout = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
                               err == httplib::Error::Write;
            last_error = httplib::to_string(err);
            continue; // transient transport failure
        }
        if (res->status == 401 || res->status == 403) {
            throw AuthError("authentication rejected (HTTP " + std::to_string(res->status) + ")");
        }
        if (res->status == 408 || res->status == 429 || res->status >= 500) {
            last_was_timeout = res->status == 408;
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body);
        }
        try {
            json doc = json::parse(res->body);
            return doc.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const json::exception& ex) {
            throw MalformedResponseError(std::string("bad completion payload: ") + ex.what());
        }
    }
    if (last_was_timeout) {
        throw TimeoutError("request timed out after " + std::to_string(cfg.retries + 1) +
                           " attempts: " + last_error);
    }
    throw TransportError("request failed after " + std::to_string(cfg.retries + 1) +
                         " attempts: " + last_error);
}

} // namespace topseg
