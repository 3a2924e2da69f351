#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "topseg/text.hpp"

namespace topseg {

struct MatchConfig {
    std::size_t n = 2; // max match distance in sentence positions

    void validate() const;
};

// score(d) = 1 - d/n for d < n, else no match. With n=2 an exact hit scores 1
// and a one-off near miss scores 0.5.
double pair_score(std::size_t distance, std::size_t n);

struct BoundaryPair {
    std::size_t hyp = 0;
    std::size_t ref = 0;
    std::size_t distance = 0;
};

struct BoundaryMatching {
    std::vector<BoundaryPair> pairs; // monotone, no boundary used twice
    std::vector<std::size_t> unmatched_hyp;
    std::vector<std::size_t> unmatched_ref;
    double total_score = 0.0;
};

// Monotone one-to-one matching between the two sorted boundary lists that
// maximizes the total pair score (dynamic programming).
BoundaryMatching match_boundaries(const Segmentation& hyp, const Segmentation& ref,
                                  const MatchConfig& cfg = {});

// B = total score / (pairs + unmatched on either side); 1 when both sets are
// empty (agreement that there are no boundaries).
double boundary_similarity(const Segmentation& hyp, const Segmentation& ref,
                           const MatchConfig& cfg = {});

struct PrecisionRecall {
    double precision = 0.0; // total score / |hyp boundaries|
    double recall = 0.0;    // total score / |ref boundaries|
};

PrecisionRecall boundary_precision_recall(const Segmentation& hyp, const Segmentation& ref,
                                          const MatchConfig& cfg = {});

// Probe pairs k sentences apart; error when hyp and ref disagree on whether
// the two probes share a segment. k defaults to half the mean reference
// segment length (at least 2).
double pk(const Segmentation& hyp, const Segmentation& ref,
          std::optional<std::size_t> k = std::nullopt);

// Like pk but an error is any window where the boundary counts differ.
double window_diff(const Segmentation& hyp, const Segmentation& ref,
                   std::optional<std::size_t> k = std::nullopt);

std::size_t default_probe_width(const Segmentation& ref);

struct DocScores {
    std::string doc_id;
    double b = 0.0;
    double bp = 0.0;
    double br = 0.0;
    double pk = 0.0;
    double wd = 0.0;
};

struct EvalReport {
    std::vector<DocScores> docs;
    DocScores mean; // doc_id empty; arithmetic mean over documents
    std::size_t count = 0;
};

EvalReport aggregate(const std::vector<DocScores>& docs);

DocScores score_document(const std::string& doc_id, const Segmentation& hyp,
                         const Segmentation& ref, const MatchConfig& cfg = {},
                         std::optional<std::size_t> k = std::nullopt);

} // namespace topseg
