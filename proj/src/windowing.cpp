#include "topseg/windowing.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

namespace topseg {

void WindowConfig::validate() const {
    if (max_segment_tokens == 0) {
        throw ConfigError("max_segment_tokens must be positive");
    }
    if (budget <= overlap) {
        throw ConfigError("window budget (" + std::to_string(budget) +
                          ") must exceed overlap (" + std::to_string(overlap) + ")");
    }
}

WindowPlan plan_windows(const SentenceIndex& index, const WindowConfig& cfg,
                        const TokenEstimator& estimator) {
    cfg.validate();

    WindowPlan plan;
    plan.num_sentences = index.count();
    plan.sentence_token_end.reserve(index.count());
    std::size_t cum = 0;
    for (std::size_t s = 1; s <= index.count(); ++s) {
        std::size_t t = estimator(index.sentence_text(s));
        if (t > cfg.budget) {
            throw SentenceTooLargeError("sentence " + std::to_string(s) + " is " +
                                        std::to_string(t) + " tokens, over the window budget of " +
                                        std::to_string(cfg.budget));
        }
        cum += t;
        plan.sentence_token_end.push_back(cum);
    }
    plan.total_tokens = cum;

    auto token_begin = [&](std::size_t sentence) {
        return sentence == 1 ? 0 : plan.sentence_token_end[sentence - 2];
    };
    auto token_end = [&](std::size_t sentence) { return plan.sentence_token_end[sentence - 1]; };

    const std::size_t S = index.count();
    std::size_t start = 1;
    while (true) {
        Window w;
        w.first_sentence = start;
        // Greedily extend while the window fits the budget.
        std::size_t end = start;
        while (end + 1 <= S && token_end(end + 1) - token_begin(start) <= cfg.budget) {
            ++end;
        }
        w.last_sentence = end;
        w.token_begin = token_begin(start);
        w.token_end = token_end(end);
        plan.windows.push_back(w);
        if (end == S) {
            break;
        }
        // Next window starts at the sentence containing the position one
        // overlap back from this window's end, snapping outward. Clamped to
        // guarantee forward progress and gap-free coverage.
        std::size_t target = w.token_end > cfg.overlap ? w.token_end - cfg.overlap : 0;
        std::size_t next = start;
        while (next <= S && token_end(next) <= target) {
            ++next;
        }
        next = std::clamp(next, start + 1, end + 1);
        start = next;
    }

    // Accept zones: split each overlap at its midpoint; the first window owns
    // the document start and the last owns the end.
    for (std::size_t i = 0; i < plan.windows.size(); ++i) {
        Window& w = plan.windows[i];
        w.zone_begin = i == 0 ? 0 : plan.windows[i - 1].zone_end;
        if (i + 1 == plan.windows.size()) {
            w.zone_end = plan.total_tokens;
        } else {
            const Window& nxt = plan.windows[i + 1];
            w.zone_end = (nxt.token_begin + w.token_end) / 2;
        }
    }
    return plan;
}

WindowMerge merge_window_boundaries(const WindowPlan& plan, const std::vector<Segmentation>& per_window) {
    if (per_window.size() != plan.windows.size()) {
        throw std::invalid_argument("one segmentation per window required");
    }
    WindowMerge result;
    result.accepted_per_window.resize(plan.windows.size());
    std::set<std::size_t> merged;
    for (std::size_t i = 0; i < plan.windows.size(); ++i) {
        const Window& w = plan.windows[i];
        if (per_window[i].num_sentences() != w.sentence_count()) {
            throw std::invalid_argument("window " + std::to_string(i) + " segmentation has " +
                                        std::to_string(per_window[i].num_sentences()) +
                                        " sentences, window has " +
                                        std::to_string(w.sentence_count()));
        }
        for (std::size_t local : per_window[i].boundaries()) {
            std::size_t global = w.first_sentence - 1 + local;
            std::size_t pos = plan.boundary_token(global);
            if (pos >= w.zone_begin && pos < w.zone_end) {
                result.accepted_per_window[i].push_back(global);
                merged.insert(global);
            } else {
                ++result.dropped_out_of_zone;
            }
        }
    }
    result.merged = Segmentation(plan.num_sentences,
                                 std::vector<std::size_t>(merged.begin(), merged.end()));
    return result;
}

} // namespace topseg
