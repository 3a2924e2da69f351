#include "topseg/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>

namespace topseg {

namespace {

std::vector<std::vector<float>> fetch_embeddings(const SentenceIndex& index,
                                                 const std::string& doc_id,
                                                 EmbeddingProvider& provider) {
    std::vector<std::string> texts;
    texts.reserve(index.count());
    for (std::size_t s = 1; s <= index.count(); ++s) {
        texts.emplace_back(index.sentence_text(s));
    }
    auto vectors = provider.embed(doc_id, 1, texts);
    if (vectors.size() != texts.size()) {
        throw ProviderError("provider returned " + std::to_string(vectors.size()) +
                            " vectors for " + std::to_string(texts.size()) + " sentences");
    }
    std::size_t dim = vectors.empty() ? 0 : vectors.front().size();
    for (const auto& v : vectors) {
        if (v.size() != dim) {
            throw DimensionMismatchError("inconsistent embedding dimensions for " + doc_id);
        }
    }
    return vectors;
}

} // namespace

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw DimensionMismatchError("cosine of vectors with dimensions " +
                                     std::to_string(a.size()) + " and " + std::to_string(b.size()));
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
        na += static_cast<double>(a[i]) * static_cast<double>(a[i]);
        nb += static_cast<double>(b[i]) * static_cast<double>(b[i]);
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

Segmentation split_every_k(std::size_t num_sentences, std::size_t k) {
    if (num_sentences < 1 || k < 1) {
        throw RangeError("split_every_k requires S >= 1 and k >= 1");
    }
    std::vector<std::size_t> boundaries;
    for (std::size_t b = k; b + 1 <= num_sentences; b += k) {
        boundaries.push_back(b);
    }
    return Segmentation(num_sentences, std::move(boundaries));
}

SimilaritySeries similarity_series(const SentenceIndex& index, const std::string& doc_id,
                                   EmbeddingProvider& provider, const SimilarityOptions& opts) {
    if (index.count() < 2) {
        throw RangeError("similarity series requires at least two sentences");
    }
    if (opts.window < 1 || opts.weight_ratio <= 0.0) {
        throw ConfigError("similarity options require window >= 1 and weight_ratio > 0");
    }
    auto vectors = fetch_embeddings(index, doc_id, provider);
    SimilaritySeries series;
    series.reserve(index.count() - 1);
    for (std::size_t b = 1; b <= index.count() - 1; ++b) {
        // Compare sentence b+1 (0-based vectors[b]) with its predecessors.
        std::size_t lookback = std::min(opts.window, b);
        double weight = 1.0;
        double total_weight = 0.0;
        double value = 0.0;
        for (std::size_t j = 1; j <= lookback; ++j) {
            value += weight * cosine_similarity(vectors[b], vectors[b - j]);
            total_weight += weight;
            weight *= opts.weight_ratio;
        }
        series.push_back(value / total_weight);
    }
    return series;
}

Segmentation trough_boundaries(const SimilaritySeries& series, double threshold) {
    std::size_t num_sentences = series.size() + 1;
    std::vector<std::size_t> boundaries;
    std::size_t i = 0;
    while (i < series.size()) {
        std::size_t run_end = i;
        while (run_end + 1 < series.size() && series[run_end + 1] == series[i]) {
            ++run_end;
        }
        bool left_ok = i == 0 || series[i - 1] >= series[i];
        bool right_ok = run_end + 1 >= series.size() || series[run_end + 1] >= series[i];
        if (left_ok && right_ok && series[i] < threshold) {
            boundaries.push_back(i + 1); // first position of the plateau
        }
        i = run_end + 1;
    }
    return Segmentation(num_sentences, std::move(boundaries));
}

Segmentation length_postprocess(const SentenceIndex& index, const Segmentation& seg,
                                const SimilaritySeries& series, std::size_t min_words,
                                std::size_t max_words) {
    if (series.size() + 1 != seg.num_sentences()) {
        throw RangeError("series length does not match segmentation");
    }
    std::set<std::size_t> boundaries(seg.boundaries().begin(), seg.boundaries().end());
    auto current = [&]() {
        return Segmentation(seg.num_sentences(),
                            std::vector<std::size_t>(boundaries.begin(), boundaries.end()));
    };

    const std::size_t max_passes = seg.num_sentences() + 8;
    for (std::size_t pass = 0; pass < max_passes; ++pass) {
        bool changed = false;

        // Split long segments at the weakest interior similarity.
        bool split_done = false;
        while (!split_done) {
            split_done = true;
            auto stats = segment_stats(index, current());
            for (const Segment& s : stats) {
                if (s.word_count <= max_words || s.first == s.last) {
                    continue;
                }
                std::size_t best = s.first;
                for (std::size_t b = s.first; b <= s.last - 1; ++b) {
                    if (series[b - 1] < series[best - 1]) {
                        best = b;
                    }
                }
                boundaries.insert(best);
                changed = true;
                split_done = false;
                break;
            }
        }

        // Merge short segments toward the more similar neighbor.
        bool merge_done = false;
        while (!merge_done) {
            merge_done = true;
            auto cur = current();
            auto stats = segment_stats(index, cur);
            for (std::size_t i = 0; i < stats.size(); ++i) {
                if (stats[i].word_count >= min_words || stats.size() == 1) {
                    continue;
                }
                bool merge_left;
                if (i == 0) {
                    merge_left = false;
                } else if (i + 1 == stats.size()) {
                    merge_left = true;
                } else {
                    double left_sim = series[stats[i].first - 2];
                    double right_sim = series[stats[i].last - 1];
                    merge_left = left_sim >= right_sim;
                }
                boundaries.erase(merge_left ? stats[i].first - 1 : stats[i].last);
                changed = true;
                merge_done = false;
                break;
            }
        }

        if (!changed) {
            break;
        }
    }
    return current();
}

namespace {

struct Edge {
    std::size_t a;
    std::size_t b;
    double weight;
};

std::vector<std::size_t> connected_components(std::size_t n, const std::vector<Edge>& edges,
                                              const std::vector<bool>& removed) {
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (removed[e]) {
            continue;
        }
        std::size_t ra = find(edges[e].a);
        std::size_t rb = find(edges[e].b);
        if (ra != rb) {
            parent[std::max(ra, rb)] = std::min(ra, rb);
        }
    }
    std::vector<std::size_t> label(n);
    for (std::size_t i = 0; i < n; ++i) {
        label[i] = find(i);
    }
    return label;
}

} // namespace

Segmentation graph_segmenter(const SentenceIndex& index, const std::string& doc_id,
                             EmbeddingProvider& provider, const GraphOptions& opts) {
    if (index.count() < 2) {
        throw RangeError("graph segmenter requires at least two sentences");
    }
    auto vectors = fetch_embeddings(index, doc_id, provider);
    const std::size_t n = vectors.size();

    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t limit = std::min(n, i + 1 + opts.max_distance);
        for (std::size_t j = i + 1; j < limit; ++j) {
            double w = cosine_similarity(vectors[i], vectors[j]);
            if (w >= opts.edge_threshold) {
                edges.push_back({i, j, w});
            }
        }
    }

    // Prune the weakest edge of any component whose weight falls well below the
    // component mean, one per component per pass, until nothing changes.
    std::vector<bool> removed(edges.size(), false);
    std::vector<std::size_t> label = connected_components(n, edges, removed);
    for (std::size_t pass = 0; pass < opts.max_prune_passes; ++pass) {
        std::map<std::size_t, std::pair<double, std::size_t>> weight_sum; // label -> (sum, count)
        std::map<std::size_t, std::size_t> weakest;                       // label -> edge id
        for (std::size_t e = 0; e < edges.size(); ++e) {
            if (removed[e]) {
                continue;
            }
            std::size_t l = label[edges[e].a];
            auto& acc = weight_sum[l];
            acc.first += edges[e].weight;
            acc.second += 1;
            auto it = weakest.find(l);
            if (it == weakest.end() || edges[e].weight < edges[it->second].weight) {
                weakest[l] = e;
            }
        }
        bool pruned = false;
        for (const auto& [l, e] : weakest) {
            const auto& [sum, count] = weight_sum[l];
            if (count < 2) {
                continue;
            }
            double mean = sum / static_cast<double>(count);
            if (edges[e].weight < opts.prune_ratio * mean) {
                removed[e] = true;
                pruned = true;
            }
        }
        if (!pruned) {
            break;
        }
        label = connected_components(n, edges, removed);
    }

    // Contiguity repair: majority vote over a local window.
    std::vector<std::size_t> repaired(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::map<std::size_t, std::size_t> votes;
        std::size_t lo = i >= opts.repair_radius ? i - opts.repair_radius : 0;
        std::size_t hi = std::min(n - 1, i + opts.repair_radius);
        for (std::size_t j = lo; j <= hi; ++j) {
            ++votes[label[j]];
        }
        std::size_t best = label[i];
        std::size_t best_count = votes[label[i]];
        for (const auto& [l, c] : votes) {
            if (c > best_count) {
                best = l;
                best_count = c;
            }
        }
        repaired[i] = best;
    }

    std::vector<std::size_t> boundaries;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (repaired[i] != repaired[i + 1]) {
            boundaries.push_back(i + 1);
        }
    }
    return Segmentation(n, std::move(boundaries));
}

} // namespace topseg
