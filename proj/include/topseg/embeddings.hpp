#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "topseg/errors.hpp"

namespace topseg {

// Source of sentence embeddings. Implementations may look vectors up by
// (doc_id, sentence index) or embed the texts directly; sentence indices are
// 1-based and texts[k] is sentence first_sentence + k.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::size_t dimension() const = 0;
    virtual std::vector<std::vector<float>> embed(const std::string& doc_id,
                                                  std::size_t first_sentence,
                                                  std::span<const std::string> texts) = 0;
};

struct EmbeddingRecord {
    std::string doc_id;
    std::size_t sentence_index = 1; // 1-based
    std::vector<float> vector;
};

// Binary vectors file: uint32 dimension, uint32 count, then per record
// uint32 doc_id length, doc_id bytes, uint32 sentence index, dimension
// little-endian float32 values.
void write_embeddings_binary(const std::filesystem::path& path, std::size_t dimension,
                             std::span<const EmbeddingRecord> records);
std::vector<EmbeddingRecord> read_embeddings_binary(const std::filesystem::path& path,
                                                    std::size_t& dimension);

// JSONL text variant for small fixtures:
// {"doc_id": ..., "sentence_index": ..., "vector": [...]} per line.
void write_embeddings_jsonl(const std::filesystem::path& path,
                            std::span<const EmbeddingRecord> records);
std::vector<EmbeddingRecord> read_embeddings_jsonl(const std::filesystem::path& path,
                                                   std::size_t& dimension);

// Precomputed vectors loaded from a binary (.bin) or JSONL (.jsonl) file.
class FileEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit FileEmbeddingProvider(const std::filesystem::path& path);
    FileEmbeddingProvider(std::size_t dimension, std::vector<EmbeddingRecord> records);

    std::size_t dimension() const override { return dimension_; }
    std::vector<std::vector<float>> embed(const std::string& doc_id, std::size_t first_sentence,
                                          std::span<const std::string> texts) override;

private:
    std::size_t dimension_ = 0;
    std::map<std::pair<std::string, std::size_t>, std::vector<float>> vectors_;
};

struct EmbeddingEndpointConfig {
    std::string endpoint; // POST {"input": [...]} -> {"embeddings": [[...], ...]}
    std::string auth_env;
    double timeout_seconds = 30.0;
    std::size_t retries = 3;
    double backoff_seconds = 0.5;
};

class RemoteEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit RemoteEmbeddingProvider(EmbeddingEndpointConfig cfg);
    ~RemoteEmbeddingProvider() override;

    // 0 until the first response fixes the dimension.
    std::size_t dimension() const override;
    std::vector<std::vector<float>> embed(const std::string& doc_id, std::size_t first_sentence,
                                          std::span<const std::string> texts) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace topseg
