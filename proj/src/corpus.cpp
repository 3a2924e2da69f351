#include "topseg/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace topseg {

using json = nlohmann::json;

std::string_view source_name(SourceTag tag) {
    switch (tag) {
    case SourceTag::human:
        return "human";
    case SourceTag::wiki:
        return "wiki";
    case SourceTag::conc:
        return "conc";
    case SourceTag::synthetic:
        return "synthetic";
    }
    return "wiki";
}

SourceTag parse_source(std::string_view name) {
    if (name == "human") {
        return SourceTag::human;
    }
    if (name == "wiki") {
        return SourceTag::wiki;
    }
    if (name == "conc") {
        return SourceTag::conc;
    }
    if (name == "synthetic") {
        return SourceTag::synthetic;
    }
    throw SchemaViolationError("unknown source tag: " + std::string(name));
}

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

// Heading level per line, or 0 when the line is body text.
using HeadingMatcher = std::size_t (*)(std::string_view line, std::string& title);

std::size_t wiki_heading_level(std::string_view line, std::string& title) {
    std::string t = trim(line);
    if (t.size() < 5 || t.front() != '=' || t.back() != '=') {
        return 0;
    }
    std::size_t open = 0;
    while (open < t.size() && t[open] == '=') {
        ++open;
    }
    std::size_t close = 0;
    while (close < t.size() && t[t.size() - 1 - close] == '=') {
        ++close;
    }
    if (open < 2 || open != close || open + close >= t.size()) {
        return 0;
    }
    title = trim(t.substr(open, t.size() - open - close));
    return title.empty() ? 0 : open - 1; // "== X ==" is level 1
}

std::size_t markdown_heading_level(std::string_view line, std::string& title) {
    std::string t = trim(line);
    std::size_t hashes = 0;
    while (hashes < t.size() && t[hashes] == '#') {
        ++hashes;
    }
    if (hashes == 0 || hashes >= t.size() || t[hashes] != ' ') {
        return 0;
    }
    title = trim(t.substr(hashes));
    return title.empty() ? 0 : hashes;
}

std::vector<Section> split_sections(std::string_view raw, HeadingMatcher matcher,
                                    std::size_t max_level) {
    std::vector<Section> sections;
    Section current; // leading text arrives with an empty heading
    std::istringstream stream{std::string(raw)};
    std::string line;
    while (std::getline(stream, line)) {
        std::string title;
        std::size_t level = matcher(line, title);
        if (level == 0) {
            current.body += line;
            current.body += '\n';
            continue;
        }
        // Heading lines never survive into the body. Deeper headings than
        // max_level are dropped without opening a new section.
        if (level <= max_level) {
            sections.push_back(std::move(current));
            current = Section{title, ""};
        }
    }
    sections.push_back(std::move(current));
    return sections;
}

bool has_content(const std::string& body) {
    return !trim(body).empty();
}

} // namespace

std::vector<Section> parse_wiki_sections(std::string_view raw, std::size_t max_level) {
    return split_sections(raw, wiki_heading_level, max_level);
}

std::vector<Section> parse_markdown_sections(std::string_view raw, std::size_t max_level) {
    return split_sections(raw, markdown_heading_level, max_level);
}

CorpusDocument ingest_headed(const std::string& id, SourceTag source,
                             std::span<const Section> sections) {
    std::vector<const Section*> kept;
    for (const Section& s : sections) {
        if (has_content(s.body)) {
            kept.push_back(&s);
        }
    }
    if (kept.empty()) {
        throw NoSectionsError("article " + id + " has no section body text");
    }

    std::string text;
    std::vector<std::size_t> boundaries;
    std::vector<std::string> headings;
    std::size_t sentences_so_far = 0;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        std::string body = trim(kept[i]->body);
        if (i > 0) {
            text += "\n\n";
            boundaries.push_back(sentences_so_far);
        }
        text += body;
        sentences_so_far += split_sentences(body).count();
        if (!kept[i]->heading.empty()) {
            headings.push_back(kept[i]->heading);
        }
    }

    CorpusDocument doc;
    doc.id = id;
    doc.source = source;
    doc.text = std::move(text);
    SentenceIndex index = split_sentences(doc.text);
    if (index.count() != sentences_so_far) {
        throw ParseError("article " + id + ": sentence count changed after joining sections");
    }
    doc.reference = Segmentation(index.count(), std::move(boundaries));
    doc.meta = json::object();
    doc.meta["headings"] = headings;
    return doc;
}

FilterDecision apply_filters(const CorpusDocument& doc, const FilterRules& rules) {
    FilterDecision decision;
    SentenceIndex index = split_sentences(doc.text);
    auto stats = segment_stats(index, doc.reference);

    if (stats.size() < rules.min_segments) {
        decision.reasons.push_back("too_few_segments(" + std::to_string(stats.size()) + "<" +
                                   std::to_string(rules.min_segments) + ")");
    }
    std::size_t shortest = std::numeric_limits<std::size_t>::max();
    for (const Segment& s : stats) {
        shortest = std::min(shortest, s.word_count);
    }
    if (shortest < rules.min_segment_words) {
        decision.reasons.push_back("short_segment(" + std::to_string(shortest) + "<" +
                                   std::to_string(rules.min_segment_words) + " words)");
    }
    double ratio = non_alpha_ratio(doc.text);
    if (ratio > rules.max_non_alpha_ratio) {
        std::ostringstream os;
        os << "non_alpha_ratio(" << ratio << ">" << rules.max_non_alpha_ratio << ")";
        decision.reasons.push_back(os.str());
    }
    decision.keep = decision.reasons.empty();
    return decision;
}

CorpusDocument make_concatenated(std::span<const CorpusDocument> pool, std::size_t k,
                                 std::uint64_t seed) {
    if (k < 1) {
        throw RangeError("make_concatenated requires k >= 1");
    }
    if (pool.size() < k) {
        throw InsufficientPoolError("need segments from " + std::to_string(k) +
                                    " distinct documents, pool has " + std::to_string(pool.size()));
    }
    std::mt19937_64 rng(seed);
    auto draw = [&rng](std::size_t bound) {
        return static_cast<std::size_t>(rng() % bound); // bound is tiny; bias is irrelevant
    };

    // Pick k distinct source documents, then one random segment from each.
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + draw(order.size() - i);
        std::swap(order[i], order[j]);
    }

    std::string text;
    std::vector<std::size_t> boundaries;
    std::size_t sentences_so_far = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const CorpusDocument& src = pool[order[i]];
        SentenceIndex index = split_sentences(src.text);
        auto ranges = src.reference.segment_ranges();
        auto [first, last] = ranges[draw(ranges.size())];
        std::size_t begin = index.span(first).begin;
        std::size_t end = index.span(last).end;
        if (i > 0) {
            text += "\n\n";
            boundaries.push_back(sentences_so_far);
        }
        text += index.text().substr(begin, end - begin);
        sentences_so_far += last - first + 1;
    }

    CorpusDocument doc;
    doc.id = "conc-" + std::to_string(seed);
    doc.source = SourceTag::conc;
    doc.text = std::move(text);
    SentenceIndex index = split_sentences(doc.text);
    if (index.count() != sentences_so_far) {
        throw ParseError("concatenated text re-splits to a different sentence count");
    }
    doc.reference = Segmentation(index.count(), std::move(boundaries));
    doc.meta = json::object();
    doc.meta["segments"] = k;
    return doc;
}

json corpus_document_to_json(const CorpusDocument& doc) {
    return json{
        {"id", doc.id},
        {"source", std::string(source_name(doc.source))},
        {"text", doc.text},
        {"boundaries", doc.reference.boundaries()},
        {"meta", doc.meta},
    };
}

CorpusDocument corpus_document_from_json(const json& record) {
    for (const char* field : {"id", "source", "text", "boundaries"}) {
        if (!record.contains(field)) {
            throw SchemaViolationError("record missing field \"" + std::string(field) + "\"");
        }
    }
    CorpusDocument doc;
    doc.id = record.at("id").get<std::string>();
    doc.source = parse_source(record.at("source").get<std::string>());
    doc.text = record.at("text").get<std::string>();
    doc.meta = record.value("meta", json::object());
    SentenceIndex index = split_sentences(doc.text);
    std::vector<std::size_t> boundaries;
    for (const auto& b : record.at("boundaries")) {
        if (!b.is_number_unsigned()) {
            throw SchemaViolationError("record " + doc.id + ": boundaries must be positive integers");
        }
        boundaries.push_back(b.get<std::size_t>());
    }
    try {
        doc.reference = Segmentation(index.count(), std::move(boundaries));
    } catch (const InvalidSegmentationError& ex) {
        throw SchemaViolationError("record " + doc.id + ": " + ex.what());
    }
    return doc;
}

std::vector<CorpusDocument> read_corpus_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open corpus file: " + path.string());
    }
    std::vector<CorpusDocument> docs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception& ex) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
        }
        try {
            docs.push_back(corpus_document_from_json(record));
        } catch (const SchemaViolationError& ex) {
            throw SchemaViolationError(path.string() + ":" + std::to_string(line_no) + ": " +
                                       ex.what());
        }
    }
    return docs;
}

void write_corpus_jsonl(const std::filesystem::path& path, std::span<const CorpusDocument> docs) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot open " + path.string() + " for writing");
    }
    for (const CorpusDocument& doc : docs) {
        out << corpus_document_to_json(doc).dump() << '\n';
    }
}

void write_filter_report_csv(const std::filesystem::path& path,
                             std::span<const std::pair<std::string, FilterDecision>> rows) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot open " + path.string() + " for writing");
    }
    out << "id,kept,reasons\n";
    for (const auto& [id, decision] : rows) {
        out << id << ',' << (decision.keep ? "true" : "false") << ',';
        for (std::size_t i = 0; i < decision.reasons.size(); ++i) {
            if (i > 0) {
                out << ';';
            }
            out << decision.reasons[i];
        }
        out << '\n';
    }
}

} // namespace topseg
