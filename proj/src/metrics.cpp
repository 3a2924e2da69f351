#include "topseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace topseg {

void MatchConfig::validate() const {
    if (n < 1) {
        throw ConfigError("match distance n must be >= 1");
    }
}

double pair_score(std::size_t distance, std::size_t n) {
    if (distance >= n) {
        return 0.0;
    }
    return 1.0 - static_cast<double>(distance) / static_cast<double>(n);
}

namespace {

void require_same_length(const Segmentation& hyp, const Segmentation& ref) {
    if (hyp.num_sentences() != ref.num_sentences()) {
        throw SentenceCountMismatchError("hypothesis has " + std::to_string(hyp.num_sentences()) +
                                         " sentences, reference has " +
                                         std::to_string(ref.num_sentences()));
    }
}

std::size_t distance_between(std::size_t a, std::size_t b) {
    return a > b ? a - b : b - a;
}

} // namespace

BoundaryMatching match_boundaries(const Segmentation& hyp, const Segmentation& ref,
                                  const MatchConfig& cfg) {
    cfg.validate();
    require_same_length(hyp, ref);
    const auto& h = hyp.boundaries();
    const auto& r = ref.boundaries();
    const std::size_t m = h.size();
    const std::size_t k = r.size();

    // dp[i][j]: best (score, pairs) over the first i hypothesis and j reference
    // boundaries. Scores are kept in integer units of 1/n so comparisons are
    // exact; among equal-score matchings the one with more pairs wins, which
    // pins down B when a d=0 pair ties with two near misses. Monotonicity is
    // free because both lists are sorted and the recurrence never crosses.
    struct Cell {
        std::size_t units = 0;
        std::size_t pairs = 0;
        bool operator>(const Cell& o) const {
            return units > o.units || (units == o.units && pairs > o.pairs);
        }
        bool operator==(const Cell& o) const = default;
    };
    std::vector<std::vector<Cell>> dp(m + 1, std::vector<Cell>(k + 1));
    for (std::size_t i = 1; i <= m; ++i) {
        for (std::size_t j = 1; j <= k; ++j) {
            Cell best = dp[i - 1][j] > dp[i][j - 1] ? dp[i - 1][j] : dp[i][j - 1];
            std::size_t d = distance_between(h[i - 1], r[j - 1]);
            if (d < cfg.n) {
                Cell paired{dp[i - 1][j - 1].units + (cfg.n - d), dp[i - 1][j - 1].pairs + 1};
                if (paired > best) {
                    best = paired;
                }
            }
            dp[i][j] = best;
        }
    }

    BoundaryMatching result;
    result.total_score = static_cast<double>(dp[m][k].units) / static_cast<double>(cfg.n);
    std::vector<bool> hyp_used(m, false);
    std::vector<bool> ref_used(k, false);
    std::size_t i = m;
    std::size_t j = k;
    while (i > 0 && j > 0) {
        std::size_t d = distance_between(h[i - 1], r[j - 1]);
        Cell paired{dp[i - 1][j - 1].units + (d < cfg.n ? cfg.n - d : 0),
                    dp[i - 1][j - 1].pairs + 1};
        if (d < cfg.n && dp[i][j] == paired) {
            result.pairs.push_back({h[i - 1], r[j - 1], d});
            hyp_used[i - 1] = true;
            ref_used[j - 1] = true;
            --i;
            --j;
        } else if (dp[i][j] == dp[i - 1][j]) {
            --i;
        } else {
            --j;
        }
    }
    std::reverse(result.pairs.begin(), result.pairs.end());
    for (std::size_t x = 0; x < m; ++x) {
        if (!hyp_used[x]) {
            result.unmatched_hyp.push_back(h[x]);
        }
    }
    for (std::size_t x = 0; x < k; ++x) {
        if (!ref_used[x]) {
            result.unmatched_ref.push_back(r[x]);
        }
    }
    return result;
}

double boundary_similarity(const Segmentation& hyp, const Segmentation& ref,
                           const MatchConfig& cfg) {
    BoundaryMatching m = match_boundaries(hyp, ref, cfg);
    std::size_t denom = m.pairs.size() + m.unmatched_hyp.size() + m.unmatched_ref.size();
    if (denom == 0) {
        return 1.0; // both empty: perfect agreement on "no boundaries"
    }
    return m.total_score / static_cast<double>(denom);
}

PrecisionRecall boundary_precision_recall(const Segmentation& hyp, const Segmentation& ref,
                                          const MatchConfig& cfg) {
    BoundaryMatching m = match_boundaries(hyp, ref, cfg);
    PrecisionRecall out;
    std::size_t nh = hyp.boundaries().size();
    std::size_t nr = ref.boundaries().size();
    if (nh == 0) {
        out.precision = nr == 0 ? 1.0 : 0.0;
    } else {
        out.precision = m.total_score / static_cast<double>(nh);
    }
    if (nr == 0) {
        out.recall = nh == 0 ? 1.0 : 0.0;
    } else {
        out.recall = m.total_score / static_cast<double>(nr);
    }
    return out;
}

std::size_t default_probe_width(const Segmentation& ref) {
    double mean_len = static_cast<double>(ref.num_sentences()) /
                      static_cast<double>(ref.boundaries().size() + 1);
    auto k = static_cast<std::size_t>(std::llround(mean_len / 2.0));
    k = std::max<std::size_t>(k, 2);
    if (ref.num_sentences() >= 2) {
        k = std::min(k, ref.num_sentences() - 1);
    }
    return k;
}

namespace {

std::size_t resolve_k(const Segmentation& hyp, const Segmentation& ref,
                      std::optional<std::size_t> k) {
    require_same_length(hyp, ref);
    if (ref.num_sentences() < 2) {
        throw SentenceCountMismatchError("pk/window_diff require at least two sentences");
    }
    std::size_t width = k.value_or(default_probe_width(ref));
    if (width < 1 || width >= ref.num_sentences()) {
        throw RangeError("probe width k=" + std::to_string(width) + " invalid for " +
                         std::to_string(ref.num_sentences()) + " sentences");
    }
    return width;
}

// boundary_counts[i] = number of boundaries <= i (prefix counts over 0..S).
std::vector<std::size_t> prefix_counts(const Segmentation& seg) {
    std::vector<std::size_t> counts(seg.num_sentences() + 1, 0);
    for (std::size_t b : seg.boundaries()) {
        counts[b] = 1;
    }
    for (std::size_t i = 1; i < counts.size(); ++i) {
        counts[i] += counts[i - 1];
    }
    return counts;
}

} // namespace

double pk(const Segmentation& hyp, const Segmentation& ref, std::optional<std::size_t> k) {
    std::size_t width = resolve_k(hyp, ref, k);
    auto hyp_counts = prefix_counts(hyp);
    auto ref_counts = prefix_counts(ref);
    std::size_t probes = ref.num_sentences() - width;
    std::size_t errors = 0;
    for (std::size_t i = 1; i <= probes; ++i) {
        // Sentences i and i+width share a segment iff no boundary in [i, i+width-1].
        bool hyp_same = hyp_counts[i + width - 1] == hyp_counts[i - 1];
        bool ref_same = ref_counts[i + width - 1] == ref_counts[i - 1];
        if (hyp_same != ref_same) {
            ++errors;
        }
    }
    return static_cast<double>(errors) / static_cast<double>(probes);
}

double window_diff(const Segmentation& hyp, const Segmentation& ref,
                   std::optional<std::size_t> k) {
    std::size_t width = resolve_k(hyp, ref, k);
    auto hyp_counts = prefix_counts(hyp);
    auto ref_counts = prefix_counts(ref);
    std::size_t probes = ref.num_sentences() - width;
    std::size_t errors = 0;
    for (std::size_t i = 1; i <= probes; ++i) {
        std::size_t hyp_in = hyp_counts[i + width - 1] - hyp_counts[i - 1];
        std::size_t ref_in = ref_counts[i + width - 1] - ref_counts[i - 1];
        if (hyp_in != ref_in) {
            ++errors;
        }
    }
    return static_cast<double>(errors) / static_cast<double>(probes);
}

DocScores score_document(const std::string& doc_id, const Segmentation& hyp,
                         const Segmentation& ref, const MatchConfig& cfg,
                         std::optional<std::size_t> k) {
    DocScores s;
    s.doc_id = doc_id;
    s.b = boundary_similarity(hyp, ref, cfg);
    PrecisionRecall pr = boundary_precision_recall(hyp, ref, cfg);
    s.bp = pr.precision;
    s.br = pr.recall;
    s.pk = pk(hyp, ref, k);
    s.wd = window_diff(hyp, ref, k);
    return s;
}

EvalReport aggregate(const std::vector<DocScores>& docs) {
    if (docs.empty()) {
        throw EmptyInputError("cannot aggregate zero documents");
    }
    EvalReport report;
    report.docs = docs;
    report.count = docs.size();
    for (const DocScores& d : docs) {
        report.mean.b += d.b;
        report.mean.bp += d.bp;
        report.mean.br += d.br;
        report.mean.pk += d.pk;
        report.mean.wd += d.wd;
    }
    double n = static_cast<double>(docs.size());
    report.mean.b /= n;
    report.mean.bp /= n;
    report.mean.br /= n;
    report.mean.pk /= n;
    report.mean.wd /= n;
    return report;
}

} // namespace topseg
