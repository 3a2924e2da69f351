#include "topseg/segmenter.hpp"

#include "topseg/baselines.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace topseg {

using json = nlohmann::json;

namespace {

constexpr const char* kSegmentInstruction =
    "You are given a document with sentence boundaries marked by square brackets. "
    "Your task is to segment the document into coherent parts. Return a list of "
    "indices corresponding to the segment boundaries of the document. This list "
    "should ONLY be a list of integers, for example '1, 3, 5'.";

constexpr const char* kRecursiveInstruction =
    "You are given a document with sentence boundaries marked by square brackets. "
    "Your task is to choose one segment boundary to split the document into two "
    "coherent parts. Return a single integer corresponding to the index of the "
    "segment boundary. This integer should be between 1 and the number of "
    "sentences in the document.";

constexpr const char* kExamplesFollow = " Some examples are shown below.";

std::string assemble_prompt(const std::string& instruction,
                            const std::vector<FewShotExample>& examples,
                            const std::string& target, const std::string& cue) {
    std::string out = instruction;
    if (!examples.empty()) {
        out += kExamplesFollow;
    }
    for (const FewShotExample& ex : examples) {
        out += "\n\nText:\n\n" + ex.text + "\n\n" + cue + "\n\n" + ex.answer;
    }
    out += "\n\nText:\n\n" + target + "\n\n" + cue;
    return out;
}

ChatRequest build_prompt(const std::string& enumerated, const SegmenterConfig& cfg,
                         bool recursive) {
    if (enumerated.empty()) {
        throw EmptyInputError("cannot build a prompt for empty text");
    }
    const auto& examples = recursive ? cfg.recursive_few_shot : cfg.few_shot;
    const char* instruction = recursive ? kRecursiveInstruction : kSegmentInstruction;
    const char* cue = recursive ? "Segment:" : "Segments:";
    ChatRequest req;
    req.system = cfg.system_prompt;
    req.messages.push_back({Role::user, assemble_prompt(instruction, examples, enumerated, cue)});
    req.decoding.deterministic = true;
    req.decoding.max_output_tokens = cfg.max_output_tokens;

    std::size_t total =
        cfg.estimator(req.system) + cfg.estimator(req.messages.back().content);
    if (total > cfg.window.budget + prompt_overhead_tokens(cfg)) {
        throw PromptTooLargeError("assembled prompt is " + std::to_string(total) +
                                  " estimated tokens, over budget " +
                                  std::to_string(cfg.window.budget + prompt_overhead_tokens(cfg)));
    }
    return req;
}

std::size_t range_word_count(const SentenceIndex& index, std::size_t first, std::size_t last) {
    std::size_t begin = index.span(first).begin;
    std::size_t end = index.span(last).end;
    return word_count(std::string_view(index.text()).substr(begin, end - begin));
}

} // namespace

void SegmenterConfig::validate() const {
    window.validate();
    if (min_segment_words == 0 || min_segment_words >= max_segment_words) {
        throw ConfigError("segment word limits require 0 < min < max");
    }
    if (max_recursion_depth < 1) {
        throw ConfigError("max_recursion_depth must be >= 1");
    }
    if (punctuation_ratio_limit <= 0.0 || punctuation_ratio_limit > 1.0) {
        throw ConfigError("punctuation_ratio_limit must be in (0, 1]");
    }
    if (fallback_split_stride < 1) {
        throw ConfigError("fallback_split_stride must be >= 1");
    }
    if (!estimator) {
        throw ConfigError("token estimator must be set");
    }
}

std::string default_system_prompt() {
    return "You are an expert linguist and a master of nuance in the meaning of written "
           "text. You are aware of when topics change in the flow of text and the meaning "
           "that words carry. You obey instructions. You think carefully before producing "
           "responses. You do not hallucinate. You are not a chatbot. You are not a "
           "summariser.";
}

std::vector<FewShotExample> load_few_shot(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open few-shot file: " + path);
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& ex) {
        throw ParseError("few-shot file " + path + ": " + ex.what());
    }
    if (!doc.is_array()) {
        throw SchemaViolationError("few-shot file must be a JSON array");
    }
    std::vector<FewShotExample> out;
    for (const auto& item : doc) {
        if (!item.is_object() || !item.contains("text") || !item.contains("answer")) {
            throw SchemaViolationError("few-shot example requires \"text\" and \"answer\" fields");
        }
        out.push_back({item.at("text").get<std::string>(), item.at("answer").get<std::string>()});
    }
    return out;
}

ChatRequest build_segment_prompt(const std::string& enumerated, const SegmenterConfig& cfg) {
    return build_prompt(enumerated, cfg, false);
}

ChatRequest build_recursive_prompt(const std::string& enumerated, const SegmenterConfig& cfg) {
    return build_prompt(enumerated, cfg, true);
}

std::size_t prompt_overhead_tokens(const SegmenterConfig& cfg) {
    std::string scaffold = cfg.system_prompt;
    scaffold += kSegmentInstruction;
    scaffold += kExamplesFollow;
    for (const FewShotExample& ex : cfg.few_shot) {
        scaffold += "\n\nText:\n\n" + ex.text + "\n\nSegments:\n\n" + ex.answer;
    }
    scaffold += "\n\nText:\n\n\n\nSegments:";
    return cfg.estimator(scaffold);
}

MergeDirection merge_target(const SentenceIndex& index, const Segment& short_seg,
                            const std::optional<Segment>& left, const std::optional<Segment>& right,
                            EmbeddingProvider* embeddings, const std::string& doc_id) {
    if (!left && !right) {
        throw RangeError("merge_target requires at least one neighbor");
    }
    if (!left) {
        return MergeDirection::right;
    }
    if (!right) {
        return MergeDirection::left;
    }
    if (embeddings != nullptr) {
        auto one = [&](std::size_t sentence) {
            std::vector<std::string> texts{std::string(index.sentence_text(sentence))};
            return embeddings->embed(doc_id, sentence, texts).at(0);
        };
        auto left_last = one(left->last);
        auto short_first = one(short_seg.first);
        auto short_last = one(short_seg.last);
        auto right_first = one(right->first);
        double sim_left = cosine_similarity(short_first, left_last);
        double sim_right = cosine_similarity(short_last, right_first);
        return sim_left >= sim_right ? MergeDirection::left : MergeDirection::right;
    }
    // Without embeddings, keep sizes balanced: merge into the smaller neighbor.
    return left->word_count <= right->word_count ? MergeDirection::left : MergeDirection::right;
}

namespace {

struct Validator {
    const SentenceIndex& index;
    const SegmenterConfig& cfg;
    ChatProvider& provider;
    EmbeddingProvider* embeddings;
    const std::string& doc_id;

    std::set<std::size_t> boundaries;
    std::vector<ValidationAction> actions;
    std::set<std::pair<std::size_t, std::size_t>> sealed; // ranges that cannot be split further

    Segmentation current() const {
        return Segmentation(index.count(),
                            std::vector<std::size_t>(boundaries.begin(), boundaries.end()));
    }

    void note(std::size_t first, std::size_t last, std::string reason) {
        actions.push_back({ValidationAction::Kind::note, first, last, 0, std::move(reason)});
    }

    // One recursive split of [first, last]; recurses on the halves.
    void split_long(std::size_t first, std::size_t last, std::size_t depth) {
        if (range_word_count(index, first, last) <= cfg.max_segment_words) {
            return;
        }
        if (first == last) {
            note(first, last, "oversize_single_sentence");
            sealed.insert({first, last});
            return;
        }
        if (depth == 0) {
            note(first, last, "recursion_exhausted");
            sealed.insert({first, last});
            return;
        }
        EnumeratedRange local = render_enumerated(index, first, last);
        std::size_t chosen = 0;
        bool fallback = false;
        try {
            ChatRequest req = build_recursive_prompt(local.text, cfg);
            try {
                chosen = parse_single_index(provider.complete(req), local.max_marker()).index;
            } catch (const NoValidIndexError&) {
                try {
                    chosen = parse_single_index(provider.complete(req), local.max_marker()).index;
                } catch (const NoValidIndexError&) {
                    fallback = true;
                }
            }
        } catch (const PromptTooLargeError&) {
            // Segment bigger than one prompt window: halve it and keep going.
            fallback = true;
        }
        if (fallback) {
            chosen = std::max<std::size_t>(1, local.sentence_count() / 2);
        }
        std::size_t global = local.global_boundary(chosen);
        boundaries.insert(global);
        actions.push_back({ValidationAction::Kind::split, first, last, global,
                           fallback ? "over_max_words_median_fallback" : "over_max_words"});
        split_long(first, global, depth - 1);
        split_long(global + 1, last, depth - 1);
    }

    // Returns true when something changed.
    bool run_split_phase() {
        bool changed = false;
        bool done = false;
        while (!done) {
            done = true;
            auto stats = segment_stats(index, current());
            for (const Segment& s : stats) {
                if (s.word_count <= cfg.max_segment_words || sealed.count({s.first, s.last})) {
                    continue;
                }
                std::size_t before = boundaries.size();
                split_long(s.first, s.last, cfg.max_recursion_depth);
                if (boundaries.size() != before) {
                    changed = true;
                    done = false;
                    break; // ranges shifted; recompute stats
                }
            }
        }
        return changed;
    }

    bool run_merge_phase() {
        bool changed = false;
        bool done = false;
        while (!done) {
            done = true;
            auto stats = segment_stats(index, current());
            if (stats.size() == 1) {
                break;
            }
            for (std::size_t i = 0; i < stats.size(); ++i) {
                const bool too_short = stats[i].word_count < cfg.min_segment_words;
                const bool too_noisy = stats[i].non_alpha_ratio > cfg.punctuation_ratio_limit;
                if (!too_short && !too_noisy) {
                    continue;
                }
                std::optional<Segment> left =
                    i > 0 ? std::optional<Segment>(stats[i - 1]) : std::nullopt;
                std::optional<Segment> right =
                    i + 1 < stats.size() ? std::optional<Segment>(stats[i + 1]) : std::nullopt;
                MergeDirection dir = merge_target(index, stats[i], left, right, embeddings, doc_id);
                std::size_t removed =
                    dir == MergeDirection::left ? stats[i].first - 1 : stats[i].last;
                boundaries.erase(removed);
                actions.push_back({dir == MergeDirection::left ? ValidationAction::Kind::merge_left
                                                               : ValidationAction::Kind::merge_right,
                                   stats[i].first, stats[i].last, removed,
                                   too_short ? "under_min_words" : "punctuation_ratio"});
                changed = true;
                done = false;
                break;
            }
        }
        return changed;
    }
};

} // namespace

ValidationResult validate_segments(const SentenceIndex& index, const Segmentation& seg,
                                   const SegmenterConfig& cfg, ChatProvider& provider,
                                   EmbeddingProvider* embeddings, const std::string& doc_id) {
    cfg.validate();
    Validator v{index, cfg, provider, embeddings, doc_id,
                {seg.boundaries().begin(), seg.boundaries().end()}, {}, {}};

    for (std::size_t pass = 0; pass < cfg.max_validation_passes; ++pass) {
        bool split_changed = v.run_split_phase();
        bool merge_changed = v.run_merge_phase();
        if (!split_changed && !merge_changed) {
            break;
        }
        if (pass + 1 == cfg.max_validation_passes) {
            v.note(1, index.count(), "validation_pass_limit");
        }
    }

    ValidationResult result;
    result.segmentation = v.current();
    result.actions = std::move(v.actions);
    // Whatever still violates a limit is kept and flagged, never dropped.
    for (const Segment& s : segment_stats(index, result.segmentation)) {
        if (s.word_count > cfg.max_segment_words) {
            result.flags.push_back({s.first, s.last, "over_max_words"});
        } else if (s.word_count < cfg.min_segment_words) {
            result.flags.push_back({s.first, s.last, "under_min_words"});
        }
        if (s.non_alpha_ratio > cfg.punctuation_ratio_limit) {
            result.flags.push_back({s.first, s.last, "punctuation_ratio"});
        }
    }
    return result;
}

SegmentResult segment_document(const Document& doc, const SegmenterConfig& cfg,
                               ChatProvider& provider, EmbeddingProvider* embeddings) {
    cfg.validate();
    SentenceIndex index = split_sentences(doc.text);

    // Few-shot examples and the instruction count against the window budget.
    std::size_t overhead = prompt_overhead_tokens(cfg);
    WindowConfig effective = cfg.window;
    if (effective.budget <= overhead + effective.overlap) {
        throw PromptTooLargeError("prompt scaffolding (" + std::to_string(overhead) +
                                  " tokens) leaves no room in the window budget");
    }
    effective.budget -= overhead;

    WindowPlan plan = plan_windows(index, effective, cfg.estimator);
    SegmentResult result;
    std::vector<Segmentation> per_window;
    per_window.reserve(plan.windows.size());

    for (std::size_t w = 0; w < plan.windows.size(); ++w) {
        const Window& window = plan.windows[w];
        WindowTrace trace;
        trace.window_index = w;
        trace.first_sentence = window.first_sentence;
        trace.last_sentence = window.last_sentence;

        std::vector<std::size_t> local;
        if (window.sentence_count() < 2) {
            per_window.push_back(Segmentation::none(window.sentence_count()));
            result.trace.windows.push_back(std::move(trace));
            continue;
        }
        EnumeratedRange enumerated =
            render_enumerated(index, window.first_sentence, window.last_sentence);
        ChatRequest req = build_segment_prompt(enumerated.text, cfg);

        bool ok = false;
        for (std::size_t attempt = 0; attempt < 2 && !ok; ++attempt) {
            trace.retried = attempt > 0;
            std::string reply = provider.complete(req);
            trace.raw_replies.push_back(reply);
            try {
                IndexListResult parsed =
                    parse_index_list(reply, enumerated.max_marker(), cfg.runaway);
                if (parsed.runaway_detected) {
                    trace.runaway = true;
                    continue; // same prompt, one more attempt
                }
                local = parsed.indices;
                trace.dropped_out_of_range = parsed.dropped_out_of_range;
                trace.dropped_duplicates = parsed.dropped_duplicates;
                ok = true;
            } catch (const NoIndicesError&) {
                continue;
            }
        }
        if (!ok) {
            // Second failure: fall back to fixed-stride boundaries for this window.
            local = split_every_k(window.sentence_count(), cfg.fallback_split_stride).boundaries();
            trace.fallback = true;
        }
        trace.local_boundaries = local;
        per_window.push_back(Segmentation(window.sentence_count(), local));
        result.trace.windows.push_back(std::move(trace));
    }

    WindowMerge merge = merge_window_boundaries(plan, per_window);
    for (std::size_t w = 0; w < plan.windows.size(); ++w) {
        result.trace.windows[w].accepted = merge.accepted_per_window[w];
        result.trace.windows[w].dropped_out_of_zone =
            result.trace.windows[w].local_boundaries.size() - merge.accepted_per_window[w].size();
    }

    ValidationResult validated =
        validate_segments(index, merge.merged, cfg, provider, embeddings, doc.id);
    result.segmentation = validated.segmentation;
    result.flags = std::move(validated.flags);
    result.trace.actions = std::move(validated.actions);
    return result;
}

json SegmentationTrace::to_json() const {
    json out;
    out["windows"] = json::array();
    for (const WindowTrace& w : windows) {
        out["windows"].push_back({
            {"window", w.window_index},
            {"first_sentence", w.first_sentence},
            {"last_sentence", w.last_sentence},
            {"replies", w.raw_replies},
            {"local_boundaries", w.local_boundaries},
            {"accepted", w.accepted},
            {"dropped_out_of_range", w.dropped_out_of_range},
            {"dropped_duplicates", w.dropped_duplicates},
            {"dropped_out_of_zone", w.dropped_out_of_zone},
            {"runaway", w.runaway},
            {"retried", w.retried},
            {"fallback", w.fallback},
        });
    }
    out["actions"] = json::array();
    for (const ValidationAction& a : actions) {
        const char* kind = "note";
        switch (a.kind) {
        case ValidationAction::Kind::split:
            kind = "split";
            break;
        case ValidationAction::Kind::merge_left:
            kind = "merge_left";
            break;
        case ValidationAction::Kind::merge_right:
            kind = "merge_right";
            break;
        case ValidationAction::Kind::note:
            kind = "note";
            break;
        }
        out["actions"].push_back({
            {"kind", kind},
            {"first", a.first},
            {"last", a.last},
            {"boundary", a.boundary},
            {"reason", a.reason},
        });
    }
    return out;
}

json result_to_json(const std::string& doc_id, std::size_t num_sentences, const Segmentation& seg,
                    const std::vector<SegmentFlag>& flags, const std::string& segmenter_name,
                    const SegmentationTrace* trace) {
    json out;
    out["doc_id"] = doc_id;
    out["num_sentences"] = num_sentences;
    out["boundaries"] = seg.boundaries();
    out["flags"] = json::array();
    for (const SegmentFlag& f : flags) {
        out["flags"].push_back({{"first", f.first}, {"last", f.last}, {"reason", f.reason}});
    }
    out["segmenter"] = segmenter_name;
    if (trace != nullptr) {
        out["trace"] = trace->to_json();
    }
    return out;
}

} // namespace topseg
