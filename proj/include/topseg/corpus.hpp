#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "topseg/text.hpp"

namespace topseg {

enum class SourceTag { human, wiki, conc, synthetic };

std::string_view source_name(SourceTag tag);
SourceTag parse_source(std::string_view name);

struct CorpusDocument {
    std::string id;
    SourceTag source = SourceTag::wiki;
    std::string text;
    Segmentation reference;
    nlohmann::json meta = nlohmann::json::object(); // title, headings, ...

    CorpusDocument() : reference(Segmentation::none(1)) {}
};

// One heading-delimited section of a raw article; text before the first
// heading arrives as a section with an empty heading.
struct Section {
    std::string heading;
    std::string body;
};

// Wiki markup: "== Heading ==" lines; level 1 is "== ... ==". Heading lines
// are always removed; only levels <= max_level create boundaries.
std::vector<Section> parse_wiki_sections(std::string_view raw, std::size_t max_level = 1);

// Markdown: "# Heading" lines; level is the number of '#'.
std::vector<Section> parse_markdown_sections(std::string_view raw, std::size_t max_level = 1);

// Builds a document from marked sections: heading lines are gone from the
// text and a reference boundary sits at each former heading position.
// Sections with no body are skipped; throws NoSectionsError when nothing has
// body text.
CorpusDocument ingest_headed(const std::string& id, SourceTag source,
                             std::span<const Section> sections);

struct FilterRules {
    std::size_t min_segments = 4;
    std::size_t min_segment_words = 20;
    double max_non_alpha_ratio = 0.20;
};

struct FilterDecision {
    bool keep = true;
    std::vector<std::string> reasons; // every triggered rule
};

FilterDecision apply_filters(const CorpusDocument& doc, const FilterRules& rules = {});

// Draws k segments from k distinct pool documents and concatenates them into
// one incoherent article with reference boundaries at the seams.
// Deterministic for a given seed.
CorpusDocument make_concatenated(std::span<const CorpusDocument> pool, std::size_t k,
                                 std::uint64_t seed);

// Corpus JSONL schema: {"id", "source", "text", "boundaries": [int], "meta": {}}
// one object per line. Reading validates boundaries against the sentence count
// of the text.
std::vector<CorpusDocument> read_corpus_jsonl(const std::filesystem::path& path);
void write_corpus_jsonl(const std::filesystem::path& path, std::span<const CorpusDocument> docs);

nlohmann::json corpus_document_to_json(const CorpusDocument& doc);
CorpusDocument corpus_document_from_json(const nlohmann::json& record);

// Filter report rows: id, kept, semicolon-joined reasons.
void write_filter_report_csv(const std::filesystem::path& path,
                             std::span<const std::pair<std::string, FilterDecision>> rows);

} // namespace topseg
