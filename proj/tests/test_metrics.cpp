#include <doctest.h>

#include <random>

#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "topseg/metrics.hpp"

using namespace topseg;

TEST_SUITE("metrics") {

TEST_CASE("identical boundary sets pair exactly") {
    Segmentation a(20, {5, 10});
    auto m = match_boundaries(a, a);
    REQUIRE(m.pairs.size() == 2);
    CHECK(m.pairs[0].distance == 0);
    CHECK(m.pairs[1].distance == 0);
    CHECK(m.unmatched_hyp.empty());
    CHECK(m.unmatched_ref.empty());
    CHECK(m.total_score == doctest::Approx(2.0));
}

TEST_CASE("near miss pairs at distance one") {
    auto m = match_boundaries(Segmentation(10, {4}), Segmentation(10, {5}));
    REQUIRE(m.pairs.size() == 1);
    CHECK(m.pairs[0].distance == 1);
    CHECK(m.total_score == doctest::Approx(0.5));
}

TEST_CASE("a reference boundary is never matched twice") {
    auto m = match_boundaries(Segmentation(10, {4, 6}), Segmentation(10, {5}));
    CHECK(m.pairs.size() == 1);
    CHECK(m.unmatched_hyp.size() == 1);
    CHECK(m.total_score == doctest::Approx(0.5));
}

TEST_CASE("sentence count mismatch is rejected") {
    CHECK_THROWS_AS(match_boundaries(Segmentation(10, {4}), Segmentation(11, {4})),
                    SentenceCountMismatchError);
    CHECK_THROWS_AS(pk(Segmentation(10, {4}), Segmentation(11, {4})),
                    SentenceCountMismatchError);
}

TEST_CASE("boundary similarity spot values") {
    CHECK(boundary_similarity(Segmentation(10, {4}), Segmentation(10, {5})) ==
          doctest::Approx(0.5));
    CHECK(boundary_similarity(Segmentation(10, {3, 7}), Segmentation(10, {3, 7})) ==
          doctest::Approx(1.0));
    CHECK(boundary_similarity(Segmentation(10, {}), Segmentation(10, {5})) ==
          doctest::Approx(0.0));
    CHECK(boundary_similarity(Segmentation(10, {}), Segmentation(10, {})) ==
          doctest::Approx(1.0));
}

TEST_CASE("precision and recall spot values") {
    auto id = boundary_precision_recall(Segmentation(10, {3}), Segmentation(10, {3}));
    CHECK(id.precision == doctest::Approx(1.0));
    CHECK(id.recall == doctest::Approx(1.0));

    auto near = boundary_precision_recall(Segmentation(10, {4, 6}), Segmentation(10, {5}));
    CHECK(near.precision == doctest::Approx(0.25));
    CHECK(near.recall == doctest::Approx(0.5));

    auto empty_hyp = boundary_precision_recall(Segmentation(10, {}), Segmentation(10, {5}));
    CHECK(empty_hyp.precision == doctest::Approx(0.0));
    CHECK(empty_hyp.recall == doctest::Approx(0.0));

    auto both_empty = boundary_precision_recall(Segmentation(10, {}), Segmentation(10, {}));
    CHECK(both_empty.precision == doctest::Approx(1.0));
    CHECK(both_empty.recall == doctest::Approx(1.0));
}

TEST_CASE("B is symmetric and 1 only on equality") {
    std::mt19937_64 rng(31);
    for (int iter = 0; iter < 200; ++iter) {
        std::size_t S = gen::pick(rng, 2, 25);
        auto a = gen::random_segmentation(rng, S);
        auto b = gen::random_segmentation(rng, S);
        double ab = boundary_similarity(a, b);
        double ba = boundary_similarity(b, a);
        CHECK(ab == doctest::Approx(ba));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
        if (a.boundaries() == b.boundaries()) {
            CHECK(ab == doctest::Approx(1.0));
        } else {
            CHECK(ab < 1.0);
        }
    }
}

TEST_CASE("matching equals exhaustive search for all small cases") {
    // Every pair of boundary subsets for S up to 6 here; the acceptance suite
    // pushes the same check to S = 8.
    for (std::size_t S = 1; S <= 6; ++S) {
        std::size_t subsets = std::size_t{1} << (S - 1);
        for (std::size_t hm = 0; hm < subsets; ++hm) {
            for (std::size_t rm = 0; rm < subsets; ++rm) {
                Segmentation hyp(S, gen::subset_boundaries(hm, S));
                Segmentation ref(S, gen::subset_boundaries(rm, S));
                MatchConfig cfg;
                auto m = match_boundaries(hyp, ref, cfg);
                auto v = oracles::enumerate_matchings(hyp.boundaries(), ref.boundaries(), cfg.n);
                REQUIRE(m.total_score ==
                        static_cast<double>(v.units) / static_cast<double>(cfg.n));
                REQUIRE(m.pairs.size() == v.pairs);
                REQUIRE(boundary_similarity(hyp, ref, cfg) ==
                        oracles::brute_b(hyp.boundaries(), ref.boundaries(), cfg.n));
            }
        }
    }
}

TEST_CASE("matching is monotone with no crossing pairs") {
    std::mt19937_64 rng(37);
    for (int iter = 0; iter < 200; ++iter) {
        std::size_t S = gen::pick(rng, 2, 30);
        auto hyp = gen::random_segmentation(rng, S);
        auto ref = gen::random_segmentation(rng, S);
        auto m = match_boundaries(hyp, ref);
        for (std::size_t i = 1; i < m.pairs.size(); ++i) {
            CHECK(m.pairs[i - 1].hyp < m.pairs[i].hyp);
            CHECK(m.pairs[i - 1].ref < m.pairs[i].ref);
        }
        for (const BoundaryPair& p : m.pairs) {
            CHECK(p.distance < 2);
        }
    }
}

TEST_CASE("pk hand-computed case") {
    // Single-segment hypothesis vs a boundary at 5, S=10, k=3: probes
    // (1,4)..(7,10); the ref splits pairs straddling 5, i.e. i in {3,4,5}.
    double v = pk(Segmentation(10, {}), Segmentation(10, {5}), 3);
    CHECK(v == doctest::Approx(3.0 / 7.0));
}

TEST_CASE("pk and window_diff are zero on identical segmentations") {
    Segmentation seg(12, {4, 8});
    CHECK(pk(seg, seg) == doctest::Approx(0.0));
    CHECK(window_diff(seg, seg) == doctest::Approx(0.0));
}

TEST_CASE("window_diff vs pk on an extra-boundary case") {
    // Hypothesis adds one boundary far from the reference's.
    Segmentation hyp(20, {5, 15});
    Segmentation ref(20, {5});
    double p = pk(hyp, ref, 3);
    double w = window_diff(hyp, ref, 3);
    CHECK(w == doctest::Approx(oracles::naive_window_diff(hyp, ref, 3)));
    CHECK(p == doctest::Approx(oracles::naive_pk(hyp, ref, 3)));
    CHECK(w >= p);
}

TEST_CASE("pk and window_diff equal naive probe enumeration") {
    std::mt19937_64 rng(43);
    for (int iter = 0; iter < 300; ++iter) {
        std::size_t S = gen::pick(rng, 2, 30);
        auto hyp = gen::random_segmentation(rng, S);
        auto ref = gen::random_segmentation(rng, S);
        std::size_t k = gen::pick(rng, 1, S - 1);
        REQUIRE(pk(hyp, ref, k) == oracles::naive_pk(hyp, ref, k));
        REQUIRE(window_diff(hyp, ref, k) == oracles::naive_window_diff(hyp, ref, k));
    }
}

TEST_CASE("default probe width is half the mean reference segment length") {
    CHECK(default_probe_width(Segmentation(20, {10})) == 5);
    CHECK(default_probe_width(Segmentation(20, {})) == 10);
    CHECK(default_probe_width(Segmentation(12, {2, 4, 6, 8, 10})) == 2); // floor at 2
}

TEST_CASE("aggregate averages per metric over documents") {
    std::vector<DocScores> docs = {
        {"a", 0.2, 0.4, 0.6, 0.1, 0.2},
        {"b", 0.4, 0.6, 0.8, 0.3, 0.4},
    };
    auto report = aggregate(docs);
    CHECK(report.count == 2);
    CHECK(report.mean.b == doctest::Approx(0.3));
    CHECK(report.mean.bp == doctest::Approx(0.5));
    CHECK(report.mean.br == doctest::Approx(0.7));
    CHECK(report.mean.pk == doctest::Approx(0.2));
    CHECK(report.mean.wd == doctest::Approx(0.3));

    auto single = aggregate({docs[0]});
    CHECK(single.mean.b == doctest::Approx(docs[0].b));
    CHECK_THROWS_AS(aggregate({}), EmptyInputError);
}

TEST_CASE("spurious far boundary lowers precision but not recall") {
    Segmentation ref(30, {10, 20});
    Segmentation hyp(30, {10, 20});
    Segmentation noisy(30, {5, 10, 20});
    auto clean = boundary_precision_recall(hyp, ref);
    auto dirty = boundary_precision_recall(noisy, ref);
    CHECK(dirty.precision < clean.precision);
    CHECK(dirty.recall == doctest::Approx(clean.recall));
    CHECK(boundary_similarity(noisy, ref) < boundary_similarity(hyp, ref));
}

} // TEST_SUITE
