#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "support/generators.hpp"
#include "topseg/baselines.hpp"

using namespace topseg;

namespace {

// In-memory provider over fixed 1-based sentence vectors for one document.
FileEmbeddingProvider fixture_provider(const std::string& doc_id,
                                       const std::vector<std::vector<float>>& vectors) {
    std::vector<EmbeddingRecord> records;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        records.push_back({doc_id, i + 1, vectors[i]});
    }
    return FileEmbeddingProvider(vectors.front().size(), std::move(records));
}

SentenceIndex doc_of(std::size_t sentences) {
    std::mt19937_64 rng(sentences * 977 + 5);
    auto index = split_sentences(gen::make_document_text(rng, sentences));
    REQUIRE(index.count() == sentences);
    return index;
}

} // namespace

TEST_SUITE("baselines") {

TEST_CASE("split_every_k places boundaries every k sentences") {
    CHECK(split_every_k(23, 5).boundaries() == std::vector<std::size_t>{5, 10, 15, 20});
    CHECK(split_every_k(5, 5).boundaries().empty());
    CHECK(split_every_k(12, 5).boundaries() == std::vector<std::size_t>{5, 10});
    CHECK(split_every_k(1, 3).boundaries().empty());
}

TEST_CASE("split_every_k output size is floor((S-1)/k)") {
    std::mt19937_64 rng(61);
    for (int iter = 0; iter < 100; ++iter) {
        std::size_t S = gen::pick(rng, 1, 200);
        std::size_t k = gen::pick(rng, 1, 12);
        CHECK(split_every_k(S, k).boundaries().size() == (S - 1) / k);
    }
}

TEST_CASE("identical sentences give a similarity series of ones") {
    auto index = doc_of(5);
    auto provider = fixture_provider("d", {{1, 2}, {1, 2}, {1, 2}, {1, 2}, {1, 2}});
    auto series = similarity_series(index, "d", provider);
    REQUIRE(series.size() == 4);
    for (double v : series) {
        CHECK(v == doctest::Approx(1.0));
    }
}

TEST_CASE("orthogonal adjacent embeddings give zero with window one") {
    auto index = doc_of(2);
    auto provider = fixture_provider("d", {{1, 0}, {0, 1}});
    SimilarityOptions opts;
    opts.window = 1;
    auto series = similarity_series(index, "d", provider, opts);
    REQUIRE(series.size() == 1);
    CHECK(series[0] == doctest::Approx(0.0));
}

TEST_CASE("three-sentence fixture matches the hand-computed weighted sum") {
    // e1=(1,0), e2=(0,1), e3=(3,4); window 2, ratio 1/2.
    // boundary 1: cos(e2,e1) = 0.
    // boundary 2: (2/3)*cos(e3,e2) + (1/3)*cos(e3,e1) = (2/3)(4/5) + (1/3)(3/5) = 11/15.
    auto index = doc_of(3);
    auto provider = fixture_provider("d", {{1, 0}, {0, 1}, {3, 4}});
    SimilarityOptions opts;
    opts.window = 2;
    auto series = similarity_series(index, "d", provider, opts);
    REQUIRE(series.size() == 2);
    CHECK(std::abs(series[0] - 0.0) < 1e-9);
    CHECK(std::abs(series[1] - 11.0 / 15.0) < 1e-9);
}

TEST_CASE("series is invariant under uniform positive scaling") {
    auto index = doc_of(6);
    std::mt19937_64 rng(67);
    std::vector<std::vector<float>> vecs;
    std::vector<std::vector<float>> scaled;
    for (int i = 0; i < 6; ++i) {
        std::vector<float> v = {static_cast<float>(gen::unit_real(rng) * 2 - 1),
                                static_cast<float>(gen::unit_real(rng) * 2 - 1),
                                static_cast<float>(gen::unit_real(rng) * 2 - 1)};
        vecs.push_back(v);
        for (float& x : v) {
            x *= 8.0f;
        }
        scaled.push_back(v);
    }
    auto p1 = fixture_provider("d", vecs);
    auto p2 = fixture_provider("d", scaled);
    auto s1 = similarity_series(index, "d", p1);
    auto s2 = similarity_series(index, "d", p2);
    REQUIRE(s1.size() == s2.size());
    for (std::size_t i = 0; i < s1.size(); ++i) {
        CHECK(s1[i] == doctest::Approx(s2[i]).epsilon(1e-6));
    }
}

TEST_CASE("series values stay within [-1, 1]") {
    std::mt19937_64 rng(71);
    for (int iter = 0; iter < 20; ++iter) {
        std::size_t S = gen::pick(rng, 2, 20);
        auto index = doc_of(S);
        std::vector<std::vector<float>> vecs;
        for (std::size_t i = 0; i < S; ++i) {
            vecs.push_back({static_cast<float>(gen::unit_real(rng) * 2 - 1),
                            static_cast<float>(gen::unit_real(rng) * 2 - 1)});
        }
        auto provider = fixture_provider("d", vecs);
        for (double v : similarity_series(index, "d", provider)) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("troughs require both threshold and local minimum") {
    CHECK(trough_boundaries({0.4, 0.5, 0.6}, 0.3).boundaries().empty());
    CHECK(trough_boundaries({0.9, 0.1, 0.8}, 0.3).boundaries() == std::vector<std::size_t>{2});
    // Below threshold but rising: only the first position is a local minimum.
    CHECK(trough_boundaries({0.1, 0.15, 0.2}, 0.3).boundaries() == std::vector<std::size_t>{1});
}

TEST_CASE("a plateau counts once at its first position") {
    CHECK(trough_boundaries({0.2, 0.2, 0.2}, 0.3).boundaries() == std::vector<std::size_t>{1});
    CHECK(trough_boundaries({0.9, 0.1, 0.1, 0.8, 0.05}, 0.3).boundaries() ==
          std::vector<std::size_t>{2, 5});
}

TEST_CASE("trough boundaries are monotone in the threshold") {
    std::mt19937_64 rng(73);
    for (int iter = 0; iter < 200; ++iter) {
        std::size_t len = gen::pick(rng, 1, 40);
        SimilaritySeries series;
        for (std::size_t i = 0; i < len; ++i) {
            series.push_back(gen::unit_real(rng) * 2 - 1);
        }
        double t1 = gen::unit_real(rng) * 2 - 1;
        double t2 = gen::unit_real(rng) * 2 - 1;
        if (t1 > t2) {
            std::swap(t1, t2);
        }
        auto low = trough_boundaries(series, t1).boundaries();
        auto high = trough_boundaries(series, t2).boundaries();
        CHECK(std::includes(high.begin(), high.end(), low.begin(), low.end()));
    }
}

TEST_CASE("length_postprocess leaves in-range segmentations alone") {
    auto index = doc_of(10);
    SimilaritySeries series(9, 0.5);
    Segmentation seg(10, {5});
    auto out = length_postprocess(index, seg, series, 1, 10000);
    CHECK(out == seg);
}

TEST_CASE("length_postprocess splits a long segment at the series minimum") {
    auto index = doc_of(10);
    SimilaritySeries series = {0.9, 0.8, 0.2, 0.7, 0.9, 0.8, 0.9, 0.7, 0.9};
    auto out = length_postprocess(index, Segmentation::none(10), series, 1, 20);
    CHECK(out.contains(3));
}

TEST_CASE("length_postprocess merges a short first segment right") {
    auto index = doc_of(10);
    SimilaritySeries series(9, 0.5);
    // Segment 1 is a single sentence, well under the minimum.
    auto out = length_postprocess(index, Segmentation(10, {1}), series, 15, 10000);
    CHECK_FALSE(out.contains(1));
}

TEST_CASE("graph segmenter separates orthogonal blocks") {
    auto index = doc_of(8);
    std::vector<std::vector<float>> vecs;
    for (int i = 0; i < 4; ++i) {
        vecs.push_back({1, 0});
    }
    for (int i = 0; i < 4; ++i) {
        vecs.push_back({0, 1});
    }
    auto provider = fixture_provider("d", vecs);
    auto seg = graph_segmenter(index, "d", provider);
    CHECK(seg.boundaries() == std::vector<std::size_t>{4});
}

TEST_CASE("graph segmenter keeps identical sentences together") {
    auto index = doc_of(6);
    auto provider =
        fixture_provider("d", {{1, 1}, {1, 1}, {1, 1}, {1, 1}, {1, 1}, {1, 1}});
    CHECK(graph_segmenter(index, "d", provider).boundaries().empty());
}

TEST_CASE("contiguity repair flips an isolated outlier") {
    auto index = doc_of(8);
    std::vector<std::vector<float>> vecs;
    for (int i = 0; i < 8; ++i) {
        vecs.push_back({1, 0});
    }
    vecs[3] = {0, 1}; // noisy member inside the block
    auto provider = fixture_provider("d", vecs);
    auto seg = graph_segmenter(index, "d", provider);
    CHECK(seg.boundaries().empty());
}

TEST_CASE("graph segmenter always returns a valid contiguous segmentation") {
    std::mt19937_64 rng(79);
    for (int iter = 0; iter < 30; ++iter) {
        std::size_t S = gen::pick(rng, 2, 24);
        auto index = doc_of(S);
        std::vector<std::vector<float>> vecs;
        for (std::size_t i = 0; i < S; ++i) {
            vecs.push_back({static_cast<float>(gen::unit_real(rng) * 2 - 1),
                            static_cast<float>(gen::unit_real(rng) * 2 - 1),
                            static_cast<float>(gen::unit_real(rng) * 2 - 1)});
        }
        auto provider = fixture_provider("d", vecs);
        auto seg = graph_segmenter(index, "d", provider);
        CHECK(seg.num_sentences() == S); // constructor already validated the rest
    }
}

TEST_CASE("cosine rejects mismatched dimensions") {
    std::vector<float> a = {1, 0};
    std::vector<float> b = {1, 0, 0};
    CHECK_THROWS_AS(cosine_similarity(a, b), DimensionMismatchError);
}

TEST_CASE("missing embeddings surface as provider errors") {
    auto index = doc_of(3);
    auto provider = fixture_provider("other-doc", {{1, 0}, {0, 1}, {1, 1}});
    CHECK_THROWS_AS(similarity_series(index, "d", provider), ProviderError);
}

TEST_CASE("binary vectors files round-trip and feed the provider") {
    auto dir = std::filesystem::temp_directory_path() / "topseg_embeddings";
    std::filesystem::create_directories(dir);
    auto path = dir / "vectors.bin";
    std::vector<EmbeddingRecord> records = {
        {"doc-a", 1, {0.5f, -1.25f, 3.0f}},
        {"doc-a", 2, {1.0f, 0.0f, 2.5f}},
        {"doc-b", 1, {-0.5f, 0.125f, 9.0f}},
    };
    write_embeddings_binary(path, 3, records);

    std::size_t dimension = 0;
    auto back = read_embeddings_binary(path, dimension);
    CHECK(dimension == 3);
    REQUIRE(back.size() == 3);
    CHECK(back[0].doc_id == "doc-a");
    CHECK(back[0].sentence_index == 1);
    CHECK(back[0].vector == records[0].vector);
    CHECK(back[2].vector == records[2].vector);

    FileEmbeddingProvider provider(path);
    CHECK(provider.dimension() == 3);
    std::vector<std::string> texts = {"x", "y"};
    auto vectors = provider.embed("doc-a", 1, texts);
    CHECK(vectors[1] == records[1].vector);

    CHECK_THROWS_AS(write_embeddings_binary(path, 2, records), DimensionMismatchError);
}

} // TEST_SUITE
