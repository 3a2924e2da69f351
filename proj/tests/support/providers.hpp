#pragma once

// Test chat providers: a lambda-backed provider for content-dependent replies
// and canned adversarial reply generators.

#include <functional>
#include <string>
#include <utility>

#include "topseg/gateway.hpp"

namespace testprov {

class FnProvider final : public topseg::ChatProvider {
public:
    using Fn = std::function<std::string(const topseg::ChatRequest&)>;
    explicit FnProvider(Fn fn) : fn_(std::move(fn)) {}
    std::string complete(const topseg::ChatRequest& request) override { return fn_(request); }

private:
    Fn fn_;
};

// Highest [k] marker in the target text of a prompt. Only meaningful for
// zero-shot prompts, where the target is the only enumerated block.
inline std::size_t max_marker_in(const std::string& text) {
    std::size_t best = 0;
    for (std::size_t i = 0; i + 1 < text.size(); ++i) {
        if (text[i] != '[') {
            continue;
        }
        std::size_t j = i + 1;
        std::size_t value = 0;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) {
            value = value * 10 + static_cast<std::size_t>(text[j] - '0');
            ++j;
        }
        if (j < text.size() && text[j] == ']' && j > i + 1) {
            best = std::max(best, value);
        }
    }
    return best;
}

// Replies with the median marker; drives recursive splitting to a balanced
// fixpoint. Requires a zero-shot config.
inline FnProvider median_split_provider() {
    return FnProvider([](const topseg::ChatRequest& req) {
        std::size_t max_marker = max_marker_in(req.messages.back().content);
        std::size_t sentences = max_marker + 1;
        return std::to_string(std::max<std::size_t>(1, sentences / 2));
    });
}

} // namespace testprov
