#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "topseg/errors.hpp"

namespace topseg {

enum class Role { system, user, assistant };

std::string_view role_name(Role role);

struct ChatMessage {
    Role role = Role::user;
    std::string content;
};

struct Decoding {
    bool deterministic = true; // maps to the provider's greedy/top-1 setting
    std::size_t max_output_tokens = 512;
};

struct ChatRequest {
    std::string system;
    std::vector<ChatMessage> messages;
    Decoding decoding;

    // All message contents joined, used for mock rule matching and traces.
    std::string flattened() const;
};

struct ProviderConfig {
    std::string endpoint; // e.g. http://host:port/v1/chat/completions
    std::string model;
    std::string auth_env;  // name of the environment variable holding the bearer token
    double timeout_seconds = 30.0;
    std::size_t retries = 3;
    double backoff_seconds = 0.5;
    std::size_t max_concurrent = 4;

    void validate() const;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
};

// Speaks the de-facto /v1/chat/completions JSON protocol. Retries transient
// transport failures with exponential backoff; authentication errors are never
// retried. Safe for concurrent use; in-flight requests are capped by
// ProviderConfig::max_concurrent.
class HttpChatProvider final : public ChatProvider {
public:
    explicit HttpChatProvider(ProviderConfig cfg);
    ~HttpChatProvider() override;

    std::string complete(const ChatRequest& request) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Deterministic scripted provider. Rules are tried in order; a rule fires when
// its match string occurs in the flattened request ("*" matches anything).
class MockChatProvider final : public ChatProvider {
public:
    struct Rule {
        std::string match; // substring, or "*" for any request
        std::string reply;
    };

    explicit MockChatProvider(std::vector<Rule> rules) : rules_(std::move(rules)) {}
    MockChatProvider(std::initializer_list<Rule> rules) : rules_(rules) {}

    // Plain JSON file: [{"match": "...", "reply": "..."}, ...].
    static std::vector<Rule> load_rules(const std::string& path);

    std::string complete(const ChatRequest& request) override;

    // Ordered (request, reply) pairs; byte-identical across identical runs.
    std::vector<std::pair<std::string, std::string>> transcript() const;

private:
    std::vector<Rule> rules_;
    mutable std::mutex mutex_;
    std::vector<std::pair<std::string, std::string>> transcript_;
};

// Runaway replies are regular index patterns that run past the number of
// sentences (seen as degenerate model output). Detection requires both an
// out-of-range index and a trailing arithmetic progression.
struct RunawayConfig {
    std::size_t min_run = 5;  // progression length
    std::size_t max_step = 5; // progression step
};

bool detect_runaway(std::span<const unsigned long long> raw_indices, std::size_t max_index,
                    const RunawayConfig& cfg = {});

struct IndexListResult {
    std::vector<std::size_t> indices; // sorted, deduplicated, within 1..max_index
    std::size_t dropped_out_of_range = 0;
    std::size_t dropped_duplicates = 0;
    bool runaway_detected = false;
    std::string raw;
};

// Extracts every decimal integer from the reply, tolerating brackets, newlines
// and trailing prose. An empty reply or "none" means "no boundaries"; anything
// else without integers raises NoIndicesError. With strict=true the reply must
// be exactly a comma/whitespace separated integer list (or an empty form).
IndexListResult parse_index_list(std::string_view raw, std::size_t max_index,
                                 const RunawayConfig& runaway = {}, bool strict = false);

struct SingleIndexResult {
    std::size_t index = 0;
    std::size_t skipped = 0; // integers seen before the first in-range one
    std::size_t extra = 0;   // integers after the winner
};

// First integer within 1..max_index wins; raises NoValidIndexError when the
// reply contains no usable integer.
SingleIndexResult parse_single_index(std::string_view raw, std::size_t max_index);

// Canonical "a, b, c" rendering; parse_index_list on the result reproduces it.
std::string format_index_list(std::span<const std::size_t> indices);

} // namespace topseg
