#pragma once

#include <cstddef>
#include <vector>

#include "topseg/embeddings.hpp"
#include "topseg/text.hpp"

namespace topseg {

// Values at boundary positions 1..S-1; each is a weighted mean of cosines, so
// every value lies in [-1, 1].
using SimilaritySeries = std::vector<double>;

// Boundaries every k sentences: {k, 2k, ...} strictly below S.
Segmentation split_every_k(std::size_t num_sentences, std::size_t k = 5);

struct SimilarityOptions {
    std::size_t window = 5;    // how many previous sentences each value looks at
    double weight_ratio = 0.5; // geometric decay, nearest sentence weighted most
};

// Value at boundary i compares sentence i+1 against the previous `window`
// sentences: sum over j of w_j * cos(e[i+1], e[i+1-j]) with geometric weights
// normalized over the positions that exist.
SimilaritySeries similarity_series(const SentenceIndex& index, const std::string& doc_id,
                                   EmbeddingProvider& provider, const SimilarityOptions& opts = {});

// Boundary wherever the series dips below the threshold at a local minimum.
// A plateau of equal values counts once, at its first position.
Segmentation trough_boundaries(const SimilaritySeries& series, double threshold = 0.3);

// Splits long segments at their lowest interior series value and merges short
// ones toward the more similar neighbor; same limits as the LLM pipeline.
Segmentation length_postprocess(const SentenceIndex& index, const Segmentation& seg,
                                const SimilaritySeries& series, std::size_t min_words = 50,
                                std::size_t max_words = 500);

struct GraphOptions {
    double edge_threshold = 0.5;
    std::size_t max_distance = 10;  // no edges between sentences further apart
    double prune_ratio = 0.75;      // an edge this far below its component mean is removed
    std::size_t max_prune_passes = 16;
    std::size_t repair_radius = 2;  // majority-vote window for contiguity repair
};

// Clusters sentences on a cosine-similarity graph: connected components after
// weak in-component edges are pruned weakest-first until stable, then a
// majority-vote pass repairs contiguity. Output is always a valid contiguous
// segmentation.
Segmentation graph_segmenter(const SentenceIndex& index, const std::string& doc_id,
                             EmbeddingProvider& provider, const GraphOptions& opts = {});

double cosine_similarity(std::span<const float> a, std::span<const float> b);

} // namespace topseg
