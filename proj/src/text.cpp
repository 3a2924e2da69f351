#include "topseg/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_set>

namespace topseg {

namespace {

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_upper_or_digit(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return std::isupper(u) != 0 || std::isdigit(u) != 0;
}

bool is_terminator(char c) {
    return c == '.' || c == '!' || c == '?';
}

// Abbreviations whose trailing period never ends a sentence.
const std::unordered_set<std::string>& abbreviations() {
    static const std::unordered_set<std::string> set = {
        "Mr.",  "Mrs.", "Ms.",  "Dr.",   "Prof.", "Rev.",  "Gen.",  "Sen.",
        "St.",  "Sr.",  "Jr.",  "Capt.", "Col.",  "Sgt.",  "Lt.",
        "e.g.", "i.e.", "cf.",  "etc.",  "vs.",   "al.",   "ca.",   "approx.",
        "U.S.", "U.K.", "U.N.", "E.U.",  "D.C.",  "p.m.",  "a.m.",
        "No.",  "Nos.", "Fig.", "Figs.", "Vol.",  "Ch.",   "pp.",   "Ed.",
        "Inc.", "Ltd.", "Co.",  "Corp.", "Dept.", "Univ.", "Assn.",
        "Jan.", "Feb.", "Mar.", "Apr.",  "Jun.",  "Jul.",  "Aug.",  "Sep.",
        "Sept.", "Oct.", "Nov.", "Dec.", "Mon.",  "Tue.",  "Wed.",  "Thu.",
        "Fri.", "Sat.", "Sun.",
    };
    return set;
}

// Word ending at (and including) position `end` of text.
std::string_view trailing_word(std::string_view text, std::size_t end) {
    std::size_t begin = end;
    while (begin > 0 && !is_space(text[begin - 1])) {
        --begin;
    }
    return text.substr(begin, end - begin + 1);
}

} // namespace

Segmentation::Segmentation(std::size_t num_sentences, std::vector<std::size_t> boundaries)
    : num_sentences_(num_sentences), boundaries_(std::move(boundaries)) {
    if (num_sentences_ < 1) {
        throw InvalidSegmentationError("segmentation requires at least one sentence");
    }
    for (std::size_t i = 0; i < boundaries_.size(); ++i) {
        std::size_t b = boundaries_[i];
        if (b < 1 || b > num_sentences_ - 1) {
            throw InvalidSegmentationError("boundary " + std::to_string(b) + " out of range 1.." +
                                           std::to_string(num_sentences_ - 1));
        }
        if (i > 0 && boundaries_[i - 1] >= b) {
            throw InvalidSegmentationError("boundaries must be strictly ascending");
        }
    }
}

bool Segmentation::contains(std::size_t boundary) const {
    return std::binary_search(boundaries_.begin(), boundaries_.end(), boundary);
}

std::vector<std::pair<std::size_t, std::size_t>> Segmentation::segment_ranges() const {
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
    ranges.reserve(boundaries_.size() + 1);
    std::size_t first = 1;
    for (std::size_t b : boundaries_) {
        ranges.emplace_back(first, b);
        first = b + 1;
    }
    ranges.emplace_back(first, num_sentences_);
    return ranges;
}

SentenceIndex SentenceIndex::build(std::string_view text) {
    std::vector<SentenceSpan> spans;
    const std::size_t n = text.size();
    std::size_t i = 0;
    while (i < n) {
        while (i < n && is_space(text[i])) {
            ++i;
        }
        if (i >= n) {
            break;
        }
        const std::size_t begin = i;
        std::size_t end = n;  // exclusive
        std::size_t next = n; // where scanning resumes
        while (i < n) {
            char c = text[i];
            if (c == '\n') {
                end = i;
                next = i + 1;
                break;
            }
            if (is_terminator(c)) {
                // Split when followed by whitespace and an uppercase letter or
                // digit, unless the trailing word is a known abbreviation.
                std::size_t j = i + 1;
                if (j < n && is_space(text[j])) {
                    while (j < n && is_space(text[j]) && text[j] != '\n') {
                        ++j;
                    }
                    if (j < n && is_upper_or_digit(text[j])) {
                        std::string_view word = trailing_word(text, i);
                        if (!abbreviations().count(std::string(word))) {
                            end = i + 1;
                            next = i + 1;
                            break;
                        }
                    }
                }
            }
            ++i;
        }
        if (i >= n) {
            end = n;
            next = n;
        }
        // Trim trailing whitespace inside the span.
        std::size_t last = end;
        while (last > begin && is_space(text[last - 1])) {
            --last;
        }
        if (last > begin) {
            spans.push_back({begin, last});
        }
        i = next;
    }
    if (spans.empty()) {
        throw EmptyInputError("text contains no sentences");
    }
    return SentenceIndex(std::string(text), std::move(spans));
}

SentenceSpan SentenceIndex::span(std::size_t sentence) const {
    if (sentence < 1 || sentence > spans_.size()) {
        throw RangeError("sentence " + std::to_string(sentence) + " out of range 1.." +
                         std::to_string(spans_.size()));
    }
    return spans_[sentence - 1];
}

std::string_view SentenceIndex::sentence_text(std::size_t sentence) const {
    SentenceSpan s = span(sentence);
    return std::string_view(text_).substr(s.begin, s.end - s.begin);
}

SentenceIndex split_sentences(std::string_view text) {
    return SentenceIndex::build(text);
}

EnumeratedRange render_enumerated(const SentenceIndex& index, std::size_t first, std::size_t last) {
    if (first < 1 || last > index.count() || first > last) {
        throw RangeError("sentence range " + std::to_string(first) + ".." + std::to_string(last) +
                         " out of bounds for " + std::to_string(index.count()) + " sentences");
    }
    EnumeratedRange out;
    out.first_sentence = first;
    out.last_sentence = last;
    std::string text;
    for (std::size_t s = first; s <= last; ++s) {
        text += index.sentence_text(s);
        if (s != last) {
            text += " [" + std::to_string(s - first + 1) + "] ";
        }
    }
    out.text = std::move(text);
    return out;
}

std::size_t estimate_tokens(std::string_view text) {
    return (text.size() + 3) / 4;
}

const TokenEstimator& default_token_estimator() {
    static const TokenEstimator est = [](std::string_view t) { return estimate_tokens(t); };
    return est;
}

std::size_t word_count(std::string_view text) {
    std::size_t count = 0;
    bool in_word = false;
    for (char c : text) {
        if (is_space(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++count;
        }
    }
    return count;
}

double non_alpha_ratio(std::string_view text) {
    std::size_t non_ws = 0;
    std::size_t non_alpha = 0;
    for (char c : text) {
        if (is_space(c)) {
            continue;
        }
        ++non_ws;
        if (std::isalpha(static_cast<unsigned char>(c)) == 0) {
            ++non_alpha;
        }
    }
    if (non_ws == 0) {
        return 0.0;
    }
    return static_cast<double>(non_alpha) / static_cast<double>(non_ws);
}

std::vector<Segment> segment_stats(const SentenceIndex& index, const Segmentation& seg) {
    if (seg.num_sentences() != index.count()) {
        throw InvalidSegmentationError("segmentation sentence count does not match index");
    }
    std::vector<Segment> out;
    for (auto [first, last] : seg.segment_ranges()) {
        Segment s;
        s.first = first;
        s.last = last;
        // Stats over the span-exact text of the range, inter-sentence
        // whitespace included.
        std::size_t begin = index.span(first).begin;
        std::size_t end = index.span(last).end;
        std::string_view text = std::string_view(index.text()).substr(begin, end - begin);
        s.word_count = word_count(text);
        s.token_estimate = estimate_tokens(text);
        s.non_alpha_ratio = non_alpha_ratio(text);
        out.push_back(s);
    }
    return out;
}

std::vector<std::string> segment_texts(const SentenceIndex& index, const Segmentation& seg) {
    if (seg.num_sentences() != index.count()) {
        throw InvalidSegmentationError("segmentation sentence count does not match index");
    }
    const std::string& text = index.text();
    std::vector<std::string> out;
    std::size_t cut = 0;
    for (std::size_t b : seg.boundaries()) {
        std::size_t next = index.span(b + 1).begin;
        out.push_back(text.substr(cut, next - cut));
        cut = next;
    }
    out.push_back(text.substr(cut));
    return out;
}

} // namespace topseg
