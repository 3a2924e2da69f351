#pragma once

#include <cstddef>
#include <vector>

#include "topseg/text.hpp"

namespace topseg {

// Overlapping prompt-window parameters, all in estimated tokens. The overlap
// defaults to twice the maximum segment length; callers that change
// max_segment_tokens without setting overlap should use derived().
struct WindowConfig {
    std::size_t budget = 3000;            // W: tokens per prompt window
    std::size_t max_segment_tokens = 750; // M
    std::size_t overlap = 1500;           // O, default 2*M

    // Returns a copy with overlap = 2 * max_segment_tokens.
    WindowConfig derived() const {
        WindowConfig c = *this;
        c.overlap = 2 * c.max_segment_tokens;
        return c;
    }
    void validate() const;
};

// One prompt window. Token positions are cumulative over per-sentence
// estimates; the accept zone is the token sub-span whose boundary decisions
// this window owns. Zones are half-open, so a boundary exactly on a zone edge
// belongs to the later window.
struct Window {
    std::size_t first_sentence = 1; // 1-based inclusive
    std::size_t last_sentence = 1;
    std::size_t token_begin = 0; // [token_begin, token_end)
    std::size_t token_end = 0;
    std::size_t zone_begin = 0; // [zone_begin, zone_end)
    std::size_t zone_end = 0;

    std::size_t sentence_count() const { return last_sentence - first_sentence + 1; }
};

struct WindowPlan {
    std::vector<Window> windows;
    // sentence_token_end[i-1] is the cumulative token position after sentence i;
    // it is also the token position of boundary i.
    std::vector<std::size_t> sentence_token_end;
    std::size_t total_tokens = 0;
    std::size_t num_sentences = 0;

    std::size_t boundary_token(std::size_t boundary) const { return sentence_token_end[boundary - 1]; }
};

// Plans overlapping windows whose edges snap outward to sentence boundaries.
// Consecutive accept zones split each overlap at its token midpoint. Throws
// SentenceTooLargeError when a single sentence exceeds the window budget.
WindowPlan plan_windows(const SentenceIndex& index, const WindowConfig& cfg,
                        const TokenEstimator& estimator = default_token_estimator());

struct WindowMerge {
    Segmentation merged;
    std::size_t dropped_out_of_zone = 0;
    // Global boundaries each window contributed after zone filtering.
    std::vector<std::vector<std::size_t>> accepted_per_window;

    WindowMerge() : merged(Segmentation::none(1)) {}
};

// Maps each window's local boundaries to global indices and keeps a boundary
// iff its token position lies inside the emitting window's accept zone.
// per_window[i] must be valid for window i's local sentence count.
WindowMerge merge_window_boundaries(const WindowPlan& plan, const std::vector<Segmentation>& per_window);

} // namespace topseg
