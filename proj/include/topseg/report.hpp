#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "topseg/baselines.hpp"
#include "topseg/metrics.hpp"

namespace topseg {

// One evaluated segmenter: name plus its report over the shared corpus.
struct NamedReport {
    std::string name;
    EvalReport report;
};

// Rows: segmenter,doc_id,B,BP,BR,Pk,WD.
void write_per_document_csv(const std::filesystem::path& path, std::span<const NamedReport> reports);

// Rows: segmenter,docs,B,BP,BR,Pk,WD (means).
void write_aggregate_csv(const std::filesystem::path& path, std::span<const NamedReport> reports);

// Reads rows written by write_aggregate_csv (means and counts only).
std::vector<NamedReport> read_aggregate_csv(const std::filesystem::path& path);

// Aligned text table, segmenters down the side and metrics across.
std::string format_aggregate_table(std::span<const NamedReport> reports);

// Similarity-series line plot with the threshold drawn and the chosen trough
// boundaries marked. Deterministic byte output for identical inputs.
std::string render_series_svg(const SimilaritySeries& series, double threshold);

// Grouped bars of mean boundary similarity per segmenter.
std::string render_report_svg(std::span<const NamedReport> reports);

// Series CSV rows: doc_id,position,value.
void write_series_csv(const std::filesystem::path& path,
                      std::span<const std::pair<std::string, SimilaritySeries>> rows);
std::vector<std::pair<std::string, SimilaritySeries>> read_series_csv(
    const std::filesystem::path& path);

} // namespace topseg
