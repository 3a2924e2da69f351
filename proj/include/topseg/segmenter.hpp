#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "topseg/embeddings.hpp"
#include "topseg/gateway.hpp"
#include "topseg/text.hpp"
#include "topseg/windowing.hpp"

namespace topseg {

struct FewShotExample {
    std::string text; // already enumerated with [i] markers
    std::string answer;
};

// JSON list of {"text": ..., "answer": ...}.
std::vector<FewShotExample> load_few_shot(const std::string& path);

std::string default_system_prompt();

struct SegmenterConfig {
    WindowConfig window;
    std::size_t min_segment_words = 50;
    std::size_t max_segment_words = 500;
    std::size_t max_recursion_depth = 6;
    double punctuation_ratio_limit = 0.20;
    std::vector<FewShotExample> few_shot;           // segmentation prompt examples
    std::vector<FewShotExample> recursive_few_shot; // single-boundary prompt examples
    std::string system_prompt = default_system_prompt();
    RunawayConfig runaway;
    std::size_t fallback_split_stride = 5; // split_every_k stride used when the model fails twice
    std::size_t max_validation_passes = 10;
    std::size_t max_output_tokens = 512;
    TokenEstimator estimator = default_token_estimator();

    void validate() const;
};

// Full prompt following the enumerated-text schema: instruction, few-shot
// "Text/Segments" blocks, then the target text with a trailing "Segments:"
// cue. Throws PromptTooLargeError when the assembled request exceeds the
// window budget plus the prompt scaffolding allowance.
ChatRequest build_segment_prompt(const std::string& enumerated, const SegmenterConfig& cfg);

// Same shape, but asks for a single boundary with a "Segment:" cue.
ChatRequest build_recursive_prompt(const std::string& enumerated, const SegmenterConfig& cfg);

// Estimated tokens of everything in a prompt besides the target text; the
// few-shot examples count against the window budget.
std::size_t prompt_overhead_tokens(const SegmenterConfig& cfg);

struct WindowTrace {
    std::size_t window_index = 0;
    std::size_t first_sentence = 1;
    std::size_t last_sentence = 1;
    std::vector<std::string> raw_replies;
    std::vector<std::size_t> local_boundaries; // after parsing
    std::vector<std::size_t> accepted;         // global, after zone filtering
    std::size_t dropped_out_of_range = 0;
    std::size_t dropped_duplicates = 0;
    std::size_t dropped_out_of_zone = 0;
    bool runaway = false;
    bool retried = false;
    bool fallback = false;
};

struct ValidationAction {
    enum class Kind { split, merge_left, merge_right, note };
    Kind kind = Kind::note;
    std::size_t first = 0; // sentence range of the segment acted on
    std::size_t last = 0;
    std::size_t boundary = 0; // inserted (split) / removed (merge); 0 for notes
    std::string reason;
};

// Replayable record of one run: merged window boundaries plus the recorded
// split/merge actions reproduce the final segmentation.
struct SegmentationTrace {
    std::vector<WindowTrace> windows;
    std::vector<ValidationAction> actions;

    nlohmann::json to_json() const;
};

struct SegmentFlag {
    std::size_t first = 0;
    std::size_t last = 0;
    std::string reason;
};

struct ValidationResult {
    Segmentation segmentation;
    std::vector<ValidationAction> actions;
    std::vector<SegmentFlag> flags;

    ValidationResult() : segmentation(Segmentation::none(1)) {}
};

enum class MergeDirection { left, right };

// Which neighbor a short segment merges into: the one whose adjacent sentence
// is more similar when embeddings are available, otherwise the one with fewer
// words. Requires at least one neighbor.
MergeDirection merge_target(const SentenceIndex& index, const Segment& short_seg,
                            const std::optional<Segment>& left, const std::optional<Segment>& right,
                            EmbeddingProvider* embeddings = nullptr, const std::string& doc_id = {});

// Splits segments over max_segment_words with recursive single-boundary
// prompts, merges segments under min_segment_words or over the punctuation
// ratio into a neighbor, and repeats to a fixpoint. Violations that cannot be
// fixed are kept and flagged, never dropped.
ValidationResult validate_segments(const SentenceIndex& index, const Segmentation& seg,
                                   const SegmenterConfig& cfg, ChatProvider& provider,
                                   EmbeddingProvider* embeddings = nullptr,
                                   const std::string& doc_id = {});

struct SegmentResult {
    Segmentation segmentation;
    std::vector<SegmentFlag> flags;
    SegmentationTrace trace;

    SegmentResult() : segmentation(Segmentation::none(1)) {}
};

// The whole pipeline: enumerate, window, prompt, merge, validate. The input
// text is never edited; reconstructing the document from the output segments
// is byte-identical to the input.
SegmentResult segment_document(const Document& doc, const SegmenterConfig& cfg,
                               ChatProvider& provider, EmbeddingProvider* embeddings = nullptr);

// One result record: {"doc_id", "num_sentences", "boundaries", "flags", "segmenter", "trace"?}.
nlohmann::json result_to_json(const std::string& doc_id, std::size_t num_sentences,
                              const Segmentation& seg, const std::vector<SegmentFlag>& flags,
                              const std::string& segmenter_name,
                              const SegmentationTrace* trace = nullptr);

} // namespace topseg
