// topseg: segment documents, build corpora, evaluate segmenters and plot
// results. Exit codes: 0 success, 2 configuration or input error, 3 provider
// failure after retries, 1 anything else.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "topseg/baselines.hpp"
#include "topseg/config.hpp"
#include "topseg/corpus.hpp"
#include "topseg/metrics.hpp"
#include "topseg/report.hpp"
#include "topseg/segmenter.hpp"

using namespace topseg;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitProvider = 3;

bool is_provider_error(const std::exception_ptr& ep) {
    try {
        std::rethrow_exception(ep);
    } catch (const TransportError&) {
        return true;
    } catch (const TimeoutError&) {
        return true;
    } catch (const AuthError&) {
        return true;
    } catch (const MalformedResponseError&) {
        return true;
    } catch (const ProviderError&) {
        return true;
    } catch (...) {
        return false;
    }
}

struct SegmentArgs {
    std::string segmenter = "split5";
    std::string config_path;
    std::string mock_script;
    std::size_t jobs = 1;
    bool include_trace = false;
    std::optional<std::size_t> min_words;
    std::optional<std::size_t> max_words;
    std::optional<std::size_t> window_budget;
    std::optional<std::size_t> overlap;
    std::string dump_series;
    std::string input;
    std::string output;
};

std::unique_ptr<EmbeddingProvider> make_embeddings(const RunConfig& cfg, bool required) {
    if (cfg.embeddings_source == "file") {
        return std::make_unique<FileEmbeddingProvider>(cfg.embeddings_path);
    }
    if (cfg.embeddings_source == "remote") {
        if (!cfg.embeddings_remote.auth_env.empty() &&
            std::getenv(cfg.embeddings_remote.auth_env.c_str()) == nullptr) {
            throw ConfigError("environment variable " + cfg.embeddings_remote.auth_env +
                              " is not set");
        }
        return std::make_unique<RemoteEmbeddingProvider>(cfg.embeddings_remote);
    }
    if (required) {
        throw ConfigError("this segmenter needs an [embeddings] section in the config");
    }
    return nullptr;
}

int run_segment(const SegmentArgs& args) {
    RunConfig cfg =
        args.config_path.empty() ? RunConfig{} : load_run_config(args.config_path);
    if (args.min_words) {
        cfg.segmenter.min_segment_words = *args.min_words;
    }
    if (args.max_words) {
        cfg.segmenter.max_segment_words = *args.max_words;
    }
    if (args.window_budget) {
        cfg.segmenter.window.budget = *args.window_budget;
    }
    if (args.overlap) {
        cfg.segmenter.window.overlap = *args.overlap;
    }
    cfg.segmenter.validate();

    auto docs = read_corpus_jsonl(args.input);

    std::unique_ptr<ChatProvider> provider;
    if (args.segmenter == "llm") {
        if (!args.mock_script.empty()) {
            provider =
                std::make_unique<MockChatProvider>(MockChatProvider::load_rules(args.mock_script));
        } else {
            if (cfg.provider.endpoint.empty()) {
                throw ConfigError("llm segmenter needs a [provider] endpoint or --provider script");
            }
            // Fail before any request leaves the machine.
            if (!cfg.provider.auth_env.empty() &&
                std::getenv(cfg.provider.auth_env.c_str()) == nullptr) {
                throw ConfigError("environment variable " + cfg.provider.auth_env + " is not set");
            }
            provider = std::make_unique<HttpChatProvider>(cfg.provider);
        }
    }
    bool needs_embeddings = args.segmenter == "trough" || args.segmenter == "graph";
    std::unique_ptr<EmbeddingProvider> embeddings = make_embeddings(cfg, needs_embeddings);

    struct DocOutcome {
        json record;
        std::exception_ptr error;
        SimilaritySeries series;
    };
    std::vector<DocOutcome> outcomes(docs.size());
    std::atomic<std::size_t> next{0};

    auto work = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= docs.size()) {
                return;
            }
            const CorpusDocument& doc = docs[i];
            DocOutcome& out = outcomes[i];
            try {
                auto index = split_sentences(doc.text);
                if (args.segmenter == "llm") {
                    Document input{doc.id, doc.text, std::nullopt};
                    auto result =
                        segment_document(input, cfg.segmenter, *provider, embeddings.get());
                    out.record = result_to_json(doc.id, index.count(), result.segmentation,
                                                result.flags, "llm",
                                                args.include_trace ? &result.trace : nullptr);
                } else if (args.segmenter == "split5") {
                    auto seg = split_every_k(index.count(), cfg.split_k);
                    out.record = result_to_json(doc.id, index.count(), seg, {}, "split5");
                } else if (args.segmenter == "trough") {
                    auto series = similarity_series(index, doc.id, *embeddings, cfg.similarity);
                    auto seg = trough_boundaries(series, cfg.trough_threshold);
                    seg = length_postprocess(index, seg, series, cfg.segmenter.min_segment_words,
                                             cfg.segmenter.max_segment_words);
                    out.record = result_to_json(doc.id, index.count(), seg, {}, "trough");
                    out.series = std::move(series);
                } else {
                    auto seg = graph_segmenter(index, doc.id, *embeddings, cfg.graph);
                    out.record = result_to_json(doc.id, index.count(), seg, {}, "graph");
                }
            } catch (...) {
                out.error = std::current_exception();
            }
        }
    };

    std::size_t jobs = std::max<std::size_t>(1, args.jobs);
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < jobs; ++t) {
        pool.emplace_back(work);
    }
    work();
    for (std::thread& t : pool) {
        t.join();
    }

    std::ofstream out(args.output);
    if (!out) {
        throw ConfigError("cannot open " + args.output + " for writing");
    }
    int exit_code = kExitOk;
    std::size_t failures = 0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (outcomes[i].error) {
            ++failures;
            std::string message;
            try {
                std::rethrow_exception(outcomes[i].error);
            } catch (const std::exception& ex) {
                message = ex.what();
            }
            out << json{{"doc_id", docs[i].id}, {"error", message}}.dump() << '\n';
            std::cerr << "error: " << docs[i].id << ": " << message << '\n';
            exit_code = is_provider_error(outcomes[i].error) ? kExitProvider : kExitFailure;
        } else {
            out << outcomes[i].record.dump() << '\n';
        }
    }

    if (!args.dump_series.empty()) {
        std::vector<std::pair<std::string, SimilaritySeries>> rows;
        for (std::size_t i = 0; i < docs.size(); ++i) {
            if (!outcomes[i].series.empty()) {
                rows.emplace_back(docs[i].id, outcomes[i].series);
            }
        }
        write_series_csv(args.dump_series, rows);
    }

    std::cerr << docs.size() - failures << "/" << docs.size() << " documents segmented ("
              << args.segmenter << ")\n";
    return exit_code;
}

struct HypRecord {
    std::vector<std::size_t> boundaries;
    std::optional<std::size_t> num_sentences;
};

int run_evaluate(const std::string& ref_path, const std::vector<std::string>& hyp_paths,
                 std::size_t n, std::optional<std::size_t> k, const std::string& out_dir) {
    auto ref_docs = read_corpus_jsonl(ref_path);
    if (ref_docs.empty()) {
        throw ConfigError("reference corpus is empty: " + ref_path);
    }

    std::vector<NamedReport> reports;
    for (const std::string& hyp_path : hyp_paths) {
        std::ifstream in(hyp_path);
        if (!in) {
            throw ParseError("cannot open results file: " + hyp_path);
        }
        std::map<std::string, HypRecord> by_id;
        std::string label = fs::path(hyp_path).stem().string();
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) {
                continue;
            }
            json record;
            try {
                record = json::parse(line);
            } catch (const json::exception& ex) {
                throw ParseError(hyp_path + ":" + std::to_string(line_no) + ": " + ex.what());
            }
            if (record.contains("error")) {
                continue; // per-document failure records carry no boundaries
            }
            for (const char* field : {"doc_id", "boundaries"}) {
                if (!record.contains(field)) {
                    throw SchemaViolationError(hyp_path + ":" + std::to_string(line_no) +
                                               ": missing field \"" + field + "\"");
                }
            }
            HypRecord h;
            h.boundaries = record.at("boundaries").get<std::vector<std::size_t>>();
            if (record.contains("num_sentences")) {
                h.num_sentences = record.at("num_sentences").get<std::size_t>();
            }
            if (record.contains("segmenter")) {
                label = record.at("segmenter").get<std::string>();
            }
            by_id[record.at("doc_id").get<std::string>()] = std::move(h);
        }

        std::string mismatches;
        for (const CorpusDocument& doc : ref_docs) {
            if (!by_id.count(doc.id)) {
                mismatches += " missing:" + doc.id;
            }
        }
        for (const auto& [id, h] : by_id) {
            bool known = false;
            for (const CorpusDocument& doc : ref_docs) {
                known |= doc.id == id;
            }
            if (!known) {
                mismatches += " extra:" + id;
            }
        }
        if (!mismatches.empty()) {
            throw IdMismatchError(hyp_path + " does not match the reference corpus:" + mismatches);
        }

        std::vector<DocScores> scores;
        for (const CorpusDocument& doc : ref_docs) {
            auto index = split_sentences(doc.text);
            const HypRecord& h = by_id.at(doc.id);
            if (h.num_sentences && *h.num_sentences != index.count()) {
                throw SentenceCountMismatchError(
                    doc.id + ": hypothesis counted " + std::to_string(*h.num_sentences) +
                    " sentences, reference has " + std::to_string(index.count()));
            }
            Segmentation hyp(index.count(), h.boundaries);
            MatchConfig match{n};
            scores.push_back(score_document(doc.id, hyp, doc.reference, match, k));
        }
        reports.push_back({label, aggregate(scores)});
    }

    fs::create_directories(out_dir);
    write_per_document_csv(fs::path(out_dir) / "per_document.csv", reports);
    write_aggregate_csv(fs::path(out_dir) / "aggregate.csv", reports);
    std::string table = format_aggregate_table(reports);
    std::ofstream table_out(fs::path(out_dir) / "report.txt");
    table_out << table;
    std::cout << table;
    return kExitOk;
}

int run_ingest(const std::string& format, const std::string& source, std::size_t max_level,
               const std::vector<std::string>& inputs, const std::string& output) {
    SourceTag tag = parse_source(source);
    std::vector<CorpusDocument> docs;
    for (const std::string& path : inputs) {
        std::ifstream in(path);
        if (!in) {
            throw ParseError("cannot open article: " + path);
        }
        std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        std::vector<Section> sections;
        if (format == "wiki") {
            sections = parse_wiki_sections(raw, max_level);
        } else {
            sections = parse_markdown_sections(raw, max_level);
        }
        docs.push_back(ingest_headed(fs::path(path).stem().string(), tag, sections));
    }
    write_corpus_jsonl(output, docs);
    std::cerr << docs.size() << " articles ingested\n";
    return kExitOk;
}

int run_filter(const FilterRules& rules, const std::string& input, const std::string& output,
               const std::string& report_path) {
    auto docs = read_corpus_jsonl(input);
    std::vector<CorpusDocument> kept;
    std::vector<std::pair<std::string, FilterDecision>> rows;
    for (const CorpusDocument& doc : docs) {
        auto decision = apply_filters(doc, rules);
        if (decision.keep) {
            kept.push_back(doc);
        }
        rows.emplace_back(doc.id, std::move(decision));
    }
    write_corpus_jsonl(output, kept);
    if (!report_path.empty()) {
        write_filter_report_csv(report_path, rows);
    }
    std::cerr << kept.size() << "/" << docs.size() << " documents kept\n";
    return kExitOk;
}

int run_concat(std::size_t k, std::uint64_t seed, std::size_t count, const std::string& input,
               const std::string& output) {
    auto pool = read_corpus_jsonl(input);
    std::vector<CorpusDocument> docs;
    for (std::size_t i = 0; i < count; ++i) {
        docs.push_back(make_concatenated(pool, k, seed + i));
    }
    write_corpus_jsonl(output, docs);
    std::cerr << docs.size() << " concatenated documents written\n";
    return kExitOk;
}

int run_plot_series(const std::string& input, const std::string& output, double threshold,
                    const std::string& doc_id) {
    auto rows = read_series_csv(input);
    if (rows.empty()) {
        throw ParseError("no series rows in " + input);
    }
    const SimilaritySeries* series = &rows.front().second;
    if (!doc_id.empty()) {
        series = nullptr;
        for (const auto& [id, s] : rows) {
            if (id == doc_id) {
                series = &s;
                break;
            }
        }
        if (series == nullptr) {
            throw ParseError("doc_id " + doc_id + " not present in " + input);
        }
    }
    std::ofstream out(output);
    if (!out) {
        throw ConfigError("cannot open " + output + " for writing");
    }
    out << render_series_svg(*series, threshold);
    return kExitOk;
}

int run_plot_report(const std::string& input, const std::string& output) {
    auto reports = read_aggregate_csv(input);
    std::ofstream out(output);
    if (!out) {
        throw ConfigError("cannot open " + output + " for writing");
    }
    out << render_report_svg(reports);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"topic segmentation toolkit"};
    app.require_subcommand(1);

    // --- segment ---
    SegmentArgs seg;
    auto* cmd_segment = app.add_subcommand("segment", "segment a corpus with a chosen segmenter");
    cmd_segment->add_option("--segmenter", seg.segmenter, "llm | split5 | trough | graph")
        ->check(CLI::IsMember({"llm", "split5", "trough", "graph"}));
    cmd_segment->add_option("--config", seg.config_path, "run config file");
    cmd_segment->add_option("--provider", seg.mock_script, "mock provider script (JSON rules)");
    cmd_segment->add_option("--jobs", seg.jobs, "worker threads");
    cmd_segment->add_flag("--include-trace", seg.include_trace,
                          "embed traces in the output records");
    cmd_segment->add_option("--min-words", seg.min_words, "minimum segment words");
    cmd_segment->add_option("--max-words", seg.max_words, "maximum segment words");
    cmd_segment->add_option("--window-budget", seg.window_budget, "prompt window budget in tokens");
    cmd_segment->add_option("--overlap", seg.overlap, "window overlap in tokens");
    cmd_segment->add_option("--dump-series", seg.dump_series,
                            "write similarity series CSV (trough)");
    cmd_segment->add_option("input", seg.input, "input corpus JSONL")->required();
    cmd_segment->add_option("output", seg.output, "output results JSONL")->required();

    // --- evaluate ---
    std::string ref_path;
    std::vector<std::string> hyp_paths;
    std::size_t n = 2;
    std::optional<std::size_t> probe_k;
    std::string out_dir = ".";
    auto* cmd_evaluate =
        app.add_subcommand("evaluate", "score hypothesis files against a reference");
    cmd_evaluate->add_option("--ref", ref_path, "reference corpus JSONL")->required();
    cmd_evaluate->add_option("--n", n, "boundary match distance");
    cmd_evaluate->add_option("--k", probe_k, "probe width for Pk and WindowDiff");
    cmd_evaluate->add_option("--out-dir", out_dir, "directory for report files");
    cmd_evaluate->add_option("hyp", hyp_paths, "results JSONL, one per segmenter")->required();

    // --- corpus ---
    auto* cmd_corpus = app.add_subcommand("corpus", "build and filter corpora");
    cmd_corpus->require_subcommand(1);

    std::string ingest_format = "wiki";
    std::string ingest_source = "wiki";
    std::size_t ingest_level = 1;
    std::vector<std::string> ingest_inputs;
    std::string ingest_output;
    auto* cmd_ingest = cmd_corpus->add_subcommand("ingest", "heading-segmented articles to JSONL");
    cmd_ingest->add_option("--format", ingest_format, "wiki | markdown")
        ->check(CLI::IsMember({"wiki", "markdown"}));
    cmd_ingest->add_option("--source", ingest_source, "source tag for the records");
    cmd_ingest->add_option("--max-heading-level", ingest_level,
                           "deepest heading level that makes a boundary");
    cmd_ingest->add_option("--out", ingest_output, "output corpus JSONL")->required();
    cmd_ingest->add_option("articles", ingest_inputs, "raw article files")->required();

    FilterRules rules;
    std::string filter_input;
    std::string filter_output;
    std::string filter_report;
    auto* cmd_filter =
        cmd_corpus->add_subcommand("filter", "drop documents violating quality rules");
    cmd_filter->add_option("--min-segments", rules.min_segments, "minimum segments per document");
    cmd_filter->add_option("--min-segment-words", rules.min_segment_words,
                           "minimum words per segment");
    cmd_filter->add_option("--max-non-alpha", rules.max_non_alpha_ratio,
                           "maximum non-alphabetic character ratio");
    cmd_filter->add_option("--report", filter_report, "filter report CSV");
    cmd_filter->add_option("input", filter_input, "input corpus JSONL")->required();
    cmd_filter->add_option("output", filter_output, "output corpus JSONL")->required();

    std::size_t concat_k = 3;
    std::uint64_t concat_seed = 0;
    std::size_t concat_count = 1;
    std::string concat_input;
    std::string concat_output;
    auto* cmd_concat =
        cmd_corpus->add_subcommand("concat", "concatenate segments into incoherent articles");
    cmd_concat->add_option("--k", concat_k, "segments per generated document");
    cmd_concat->add_option("--seed", concat_seed, "generator seed")->required();
    cmd_concat->add_option("--count", concat_count, "documents to generate");
    cmd_concat->add_option("input", concat_input, "pool corpus JSONL")->required();
    cmd_concat->add_option("output", concat_output, "output corpus JSONL")->required();

    // --- plot ---
    auto* cmd_plot = app.add_subcommand("plot", "emit SVG plots");
    cmd_plot->require_subcommand(1);

    std::string series_input;
    std::string series_output;
    double series_threshold = 0.3;
    std::string series_doc;
    auto* cmd_plot_ser = cmd_plot->add_subcommand("series", "similarity series line plot");
    cmd_plot_ser->add_option("--threshold", series_threshold, "trough threshold line");
    cmd_plot_ser->add_option("--doc", series_doc, "document id (default: first in file)");
    cmd_plot_ser->add_option("input", series_input, "series CSV")->required();
    cmd_plot_ser->add_option("output", series_output, "output SVG")->required();

    std::string report_input;
    std::string report_output;
    auto* cmd_plot_rep =
        cmd_plot->add_subcommand("report", "boundary similarity bars per segmenter");
    cmd_plot_rep->add_option("input", report_input, "aggregate CSV")->required();
    cmd_plot_rep->add_option("output", report_output, "output SVG")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (cmd_segment->parsed()) {
            return run_segment(seg);
        }
        if (cmd_evaluate->parsed()) {
            return run_evaluate(ref_path, hyp_paths, n, probe_k, out_dir);
        }
        if (cmd_ingest->parsed()) {
            return run_ingest(ingest_format, ingest_source, ingest_level, ingest_inputs,
                              ingest_output);
        }
        if (cmd_filter->parsed()) {
            return run_filter(rules, filter_input, filter_output, filter_report);
        }
        if (cmd_concat->parsed()) {
            return run_concat(concat_k, concat_seed, concat_count, concat_input, concat_output);
        }
        if (cmd_plot_ser->parsed()) {
            return run_plot_series(series_input, series_output, series_threshold, series_doc);
        }
        if (cmd_plot_rep->parsed()) {
            return run_plot_report(report_input, report_output);
        }
    } catch (const ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << '\n';
        return kExitConfig;
    } catch (const IdMismatchError& ex) {
        std::cerr << "id mismatch: " << ex.what() << '\n';
        return kExitConfig;
    } catch (const SchemaViolationError& ex) {
        std::cerr << "schema error: " << ex.what() << '\n';
        return kExitConfig;
    } catch (const ParseError& ex) {
        std::cerr << "parse error: " << ex.what() << '\n';
        return kExitConfig;
    } catch (const SentenceCountMismatchError& ex) {
        std::cerr << "sentence count mismatch: " << ex.what() << '\n';
        return kExitConfig;
    } catch (const NoSectionsError& ex) {
        std::cerr << "ingest error: " << ex.what() << '\n';
        return kExitConfig;
    } catch (const InsufficientPoolError& ex) {
        std::cerr << "pool error: " << ex.what() << '\n';
        return kExitConfig;
    } catch (const AuthError& ex) {
        std::cerr << "auth error: " << ex.what() << '\n';
        return kExitProvider;
    } catch (const TransportError& ex) {
        std::cerr << "provider error: " << ex.what() << '\n';
        return kExitProvider;
    } catch (const TimeoutError& ex) {
        std::cerr << "provider timeout: " << ex.what() << '\n';
        return kExitProvider;
    } catch (const Error& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kExitFailure;
    }
    return kExitOk;
}
