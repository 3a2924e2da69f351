#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "topseg/errors.hpp"

namespace topseg {

// Byte span of one sentence, [begin, end), trimmed of surrounding whitespace.
struct SentenceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

// A set of boundary indices between sentences. Boundary b sits after sentence b,
// so valid boundaries are 1..S-1 and the number of segments is |boundaries| + 1.
class Segmentation {
public:
    Segmentation(std::size_t num_sentences, std::vector<std::size_t> boundaries);

    static Segmentation none(std::size_t num_sentences) { return Segmentation(num_sentences, {}); }

    std::size_t num_sentences() const { return num_sentences_; }
    const std::vector<std::size_t>& boundaries() const { return boundaries_; }
    std::size_t num_segments() const { return boundaries_.size() + 1; }
    bool contains(std::size_t boundary) const;

    // Inclusive 1-based sentence ranges, tiling 1..S in order.
    std::vector<std::pair<std::size_t, std::size_t>> segment_ranges() const;

    friend bool operator==(const Segmentation&, const Segmentation&) = default;

private:
    std::size_t num_sentences_;
    std::vector<std::size_t> boundaries_;
};

// Ordered sentence spans over one document; the coordinate system every other
// module works in. Owns a copy of the text so spans can always be resolved.
class SentenceIndex {
public:
    static SentenceIndex build(std::string_view text); // == split_sentences

    std::size_t count() const { return spans_.size(); }
    const std::string& text() const { return text_; }
    const std::vector<SentenceSpan>& spans() const { return spans_; }

    // 1-based accessors.
    SentenceSpan span(std::size_t sentence) const;
    std::string_view sentence_text(std::size_t sentence) const;

private:
    SentenceIndex(std::string text, std::vector<SentenceSpan> spans)
        : text_(std::move(text)), spans_(std::move(spans)) {}

    std::string text_;
    std::vector<SentenceSpan> spans_;
};

// Splits text into sentences: '.', '!' and '?' followed by whitespace and an
// uppercase letter or digit end a sentence unless the preceding word is a known
// abbreviation; a newline always ends the current sentence, so heading and
// table-row lines become their own sentences. Throws EmptyInputError when the
// text is all whitespace.
SentenceIndex split_sentences(std::string_view text);

struct Document {
    std::string id;
    std::string text;
    std::optional<Segmentation> reference;
};

// Per-segment statistics used by validation and corpus filters.
struct Segment {
    std::size_t first = 0; // 1-based inclusive sentence range
    std::size_t last = 0;
    std::size_t word_count = 0;
    std::size_t token_estimate = 0;
    double non_alpha_ratio = 0.0;
};

// Sentences of [first, last] joined with " [i] " markers after each interior
// sentence, renumbered locally from 1.
struct EnumeratedRange {
    std::string text;
    std::size_t first_sentence = 1; // global 1-based range
    std::size_t last_sentence = 1;

    std::size_t sentence_count() const { return last_sentence - first_sentence + 1; }
    std::size_t max_marker() const { return sentence_count() - 1; }
    // Local marker i corresponds to the global boundary after sentence first-1+i.
    std::size_t global_boundary(std::size_t local) const { return first_sentence - 1 + local; }
};

EnumeratedRange render_enumerated(const SentenceIndex& index, std::size_t first, std::size_t last);

// Default token estimator: ceil(bytes / 4). Coarse but monotone; exact
// tokenizers plug in through TokenEstimator.
std::size_t estimate_tokens(std::string_view text);

using TokenEstimator = std::function<std::size_t(std::string_view)>;

const TokenEstimator& default_token_estimator();

// Maximal whitespace-delimited runs.
std::size_t word_count(std::string_view text);

// (characters not in [A-Za-z] and not whitespace) / (non-whitespace characters).
// Empty or all-whitespace input yields 0.
double non_alpha_ratio(std::string_view text);

std::vector<Segment> segment_stats(const SentenceIndex& index, const Segmentation& seg);

// Cuts the original text at segment boundaries. Concatenating the returned
// pieces reproduces the document text byte for byte: the cut before a segment
// is the byte where its first sentence starts, so inter-segment whitespace
// stays with the preceding piece and leading whitespace with the first.
std::vector<std::string> segment_texts(const SentenceIndex& index, const Segmentation& seg);

} // namespace topseg
